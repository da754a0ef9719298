# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .conv_tasnet import ConvTasNet, enhance, init_se_model, SEConfig, TemporalBlock

__all__ = [
    "enhance",
    "init_se_model",
    "ConvTasNet",
    "SEConfig",
    "TemporalBlock",
]
