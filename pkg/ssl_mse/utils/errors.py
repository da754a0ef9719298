# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Optional


class CheckpointError(ValueError):
    """Raised for unreadable checkpoint files: bad magic, version mismatch, truncation or duplicate tensor names."""


class ConfigError(ValueError):
    """Raised for unknown config keys, malformed overrides and missing prerequisite artifacts."""


class FrozenParameterError(RuntimeError):
    """Raised when a module that must stay frozen changed during a training stage."""


class NonFiniteLossError(RuntimeError):
    """Raised when a training or gradient step produced a non-finite loss.

    Args:
        stage (str): training stage, e.g. ``'pretrain'``.
        epoch (Optional[int]): epoch index (1-based), if known.
        batch (Optional[int]): batch index within the epoch, if known.
    """

    def __init__(
        self, stage: str, epoch: Optional[int] = None, batch: Optional[int] = None
    ) -> None:
        self.stage = stage
        self.epoch = epoch
        self.batch = batch
        super().__init__(
            f"non-finite loss in stage '{stage}' at epoch {epoch}, batch {batch}"
        )
