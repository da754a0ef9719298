# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .config import (
    apply_override,
    config_from_dict,
    config_hash,
    load_config,
    EvaluateConfig,
    ExperimentConfig,
    SweepConfig,
)
from .main import build_parser, main, run

__all__ = [
    "apply_override",
    "build_parser",
    "config_from_dict",
    "config_hash",
    "load_config",
    "main",
    "run",
    "EvaluateConfig",
    "ExperimentConfig",
    "SweepConfig",
]
