# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .probe import (
    DownstreamProbe,
    eval_probe,
    extract_features,
    frame_accuracy,
    ProbeConfig,
    ProbeResult,
    train_probe,
    TRAIN_MODES,
)
from .weighted_sum import TaskWeights, weighted_features

__all__ = [
    "eval_probe",
    "extract_features",
    "frame_accuracy",
    "train_probe",
    "weighted_features",
    "DownstreamProbe",
    "ProbeConfig",
    "ProbeResult",
    "TaskWeights",
    "TRAIN_MODES",
]
