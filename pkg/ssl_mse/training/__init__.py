# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .checkpoint import (
    deserialize_checkpoint,
    load_checkpoint,
    save_checkpoint,
    serialize_checkpoint,
)
from .grad_check import finite_difference_check, grad_check, GradCheckResult
from .schedule import lr_schedule_step, make_plateau_scheduler
from .trainer import (
    evaluate_se,
    finetune_sslmse,
    load_se_state,
    pretrain_se,
    EpochLog,
    SNRObjective,
    TrainConfig,
    TrainResult,
)

__all__ = [
    "deserialize_checkpoint",
    "evaluate_se",
    "finetune_sslmse",
    "finite_difference_check",
    "grad_check",
    "load_checkpoint",
    "load_se_state",
    "lr_schedule_step",
    "make_plateau_scheduler",
    "pretrain_se",
    "save_checkpoint",
    "serialize_checkpoint",
    "EpochLog",
    "GradCheckResult",
    "SNRObjective",
    "TrainConfig",
    "TrainResult",
]
