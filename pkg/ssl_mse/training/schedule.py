# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import math

from torch.optim import Optimizer
from torch.optim.lr_scheduler import ReduceLROnPlateau


def make_plateau_scheduler(
    optimizer: Optimizer, factor: float = 0.75, patience: int = 2
) -> ReduceLROnPlateau:
    r"""Plateau rule: multiply the learning rate by ``factor`` once the development loss has not
    strictly improved on its best value for ``patience`` consecutive epochs; the counter then restarts.

    Args:
        optimizer (Optimizer): optimizer whose learning rate is scheduled.
        factor (float): multiplicative decay in (0, 1). Defaults to 3/4.
        patience (int): non-improving epochs that trigger a reduction, at least 1. Defaults to 2.

    Returns:
        ReduceLROnPlateau: the scheduler; call :func:`lr_schedule_step` once per epoch.
    """
    if not 0 < factor < 1:
        raise ValueError(f"factor must be in (0, 1). Got {factor}.")
    if patience < 1:
        raise ValueError(f"patience must be at least 1. Got {patience}.")

    # ReduceLROnPlateau reduces when the bad-epoch count exceeds its patience
    return ReduceLROnPlateau(
        optimizer,
        mode="min",
        factor=factor,
        patience=patience - 1,
        threshold=0.0,
        threshold_mode="abs",
        eps=0.0,
    )


def lr_schedule_step(scheduler: ReduceLROnPlateau, dev_loss: float) -> float:
    """Feed one epoch's development loss to the plateau rule and return the new learning rate."""
    if not math.isfinite(dev_loss):
        raise ValueError(f"dev_loss must be finite. Got {dev_loss}.")
    scheduler.step(dev_loss)
    return scheduler.optimizer.param_groups[0]["lr"]
