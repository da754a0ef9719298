# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Union

import torch
from torch import nn, Tensor

from ssl_mse.encoder import FeatureStack


def weighted_features(stack: Union[FeatureStack, Tensor], weights: Tensor) -> Tensor:
    r"""Weighted sum of the layers, :math:`F^{\tau} = \sum_n w_n^{\tau} F_n`.

    Args:
        stack (Union[FeatureStack, Tensor]): features, shape (N, ..., D, T').
        weights (Tensor): layer weights, shape (N,).

    Raises:
        ValueError: if the number of weights differs from the number of layers.

    Returns:
        Tensor: combined features, shape (..., D, T').
    """
    layers = stack.layers if isinstance(stack, FeatureStack) else stack
    if weights.shape != (layers.shape[0],):
        raise ValueError(
            f"Expected {layers.shape[0]} layer weights. Got shape {tuple(weights.shape)}."
        )
    return torch.tensordot(weights.to(layers.dtype), layers, dims=1)


class TaskWeights(nn.Module):
    r"""Learnable layer weights :math:`w^{\tau}`, softmax-parameterized so they stay a convex combination.

    Args:
        n_layers (int): number of encoder layers :math:`N`.
    """

    def __init__(self, n_layers: int) -> None:
        super().__init__()
        self.logits = nn.Parameter(torch.zeros(n_layers))

    @property
    def weights(self) -> Tensor:
        return torch.softmax(self.logits, dim=0)

    def forward(self, stack: Union[FeatureStack, Tensor]) -> Tensor:
        return weighted_features(stack, self.weights)
