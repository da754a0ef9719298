# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .layer_weights import LAYER_WEIGHT_SCHEMES, make_layer_weights, normalize_scheme
from .multitask import (
    loss_gradients,
    LossBreakdown,
    LossConfig,
    multitask_loss,
    MultitaskLoss,
)
from .snr import snr_training_loss, SNRLoss
from .ssl_mse import ssl_mse, ssl_mse_distance, SSLMSELoss

__all__ = [
    "loss_gradients",
    "make_layer_weights",
    "multitask_loss",
    "normalize_scheme",
    "snr_training_loss",
    "ssl_mse",
    "ssl_mse_distance",
    "LossBreakdown",
    "LossConfig",
    "MultitaskLoss",
    "SNRLoss",
    "SSLMSELoss",
    "LAYER_WEIGHT_SCHEMES",
]
