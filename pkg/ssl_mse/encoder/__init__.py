# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .feature_stack import FeatureStack
from .frozen_encoder import (
    encode,
    EncoderConfig,
    FrozenEncoder,
    init_frozen_encoder,
    layer_dims,
    ResidualBlock,
)

__all__ = [
    "encode",
    "init_frozen_encoder",
    "layer_dims",
    "EncoderConfig",
    "FeatureStack",
    "FrozenEncoder",
    "ResidualBlock",
]
