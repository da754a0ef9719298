# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .errors import (
    CheckpointError,
    ConfigError,
    FrozenParameterError,
    NonFiniteLossError,
)
from .model_wrapper import ModelWrapper
from .progress import progress, TQDM_AVAILABLE
from .tables import format_cell, read_csv, write_csv
from .utils import (
    as_batch,
    freeze,
    num_parameters,
    parameters_checksum,
)

__all__ = [
    "as_batch",
    "format_cell",
    "freeze",
    "num_parameters",
    "parameters_checksum",
    "progress",
    "read_csv",
    "write_csv",
    "ModelWrapper",
    "CheckpointError",
    "ConfigError",
    "FrozenParameterError",
    "NonFiniteLossError",
    "TQDM_AVAILABLE",
]
