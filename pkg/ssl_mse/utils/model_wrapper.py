# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Optional

import torch
from torch import nn, Tensor


class ModelWrapper(nn.Module):
    """
    This class wraps an optional enhancement model into a frozen waveform-to-waveform stage.

    It is the first stage of the ``SE -> encoder -> weighted sum -> downstream`` pipeline. With
    ``model=None`` the stage is the identity, which is how the "no SE" condition is evaluated.
    The wrapped model runs in eval mode without gradient tracking, so it is never updated
    through this wrapper.
    """

    def __init__(self, model: Optional[nn.Module] = None):
        super().__init__()
        self.model = model
        if model is not None:
            model.eval()

    @property
    def is_identity(self) -> bool:
        return self.model is None

    def train(self, mode: bool = True) -> "ModelWrapper":
        # the wrapped model stays in eval mode
        super().train(mode)
        if self.model is not None:
            self.model.eval()
        return self

    def forward(self, x: Tensor) -> Tensor:
        r"""
        | given a waveform x of shape (time,) or (batch, time)
        | returns the enhanced waveform with the same shape, or x itself without a model.

        Args:
            x (Tensor): input waveform(s).

        Returns:
            Tensor: enhanced waveform(s).
        """
        if self.model is None:
            return x
        with torch.no_grad():
            return self.model(x)
