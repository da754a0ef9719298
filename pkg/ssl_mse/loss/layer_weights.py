# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import torch
from torch import Tensor

LAYER_WEIGHT_SCHEMES = ("last", "all", "latter_half")


def normalize_scheme(scheme: str) -> str:
    """Canonical scheme name; ``'latter-half'`` is accepted for ``'latter_half'``."""
    scheme = scheme.replace("-", "_")
    if scheme not in LAYER_WEIGHT_SCHEMES:
        raise ValueError(
            f"{scheme} is not a valid layer-weight scheme, expected one of {LAYER_WEIGHT_SCHEMES}."
        )
    return scheme


def make_layer_weights(
    scheme: str, n_layers: int, dtype: torch.dtype = torch.float64
) -> Tensor:
    r"""Layer weights :math:`\tilde{w}` of the SSL-MSE loss.

    - ``'last'``: indicator on layer :math:`N`.
    - ``'all'``: :math:`1/N` on every layer.
    - ``'latter_half'``: :math:`1/(N - \lfloor N/2 \rfloor)` on layers :math:`\lfloor N/2 \rfloor + 1, \ldots, N`, zero elsewhere.

    Every scheme sums to one.

    Args:
        scheme (str): ``'last'`` | ``'all'`` | ``'latter_half'``.
        n_layers (int): number of encoder layers :math:`N`.
        dtype (torch.dtype): dtype of the result. Defaults to float64.

    Raises:
        ValueError: on an unknown scheme or ``n_layers < 1``.

    Returns:
        Tensor: weights, shape (N,).
    """
    scheme = normalize_scheme(scheme)
    if n_layers < 1:
        raise ValueError(f"n_layers must be at least 1. Got {n_layers}.")

    weights = torch.zeros(n_layers, dtype=dtype)
    if scheme == "last":
        weights[-1] = 1.0
    elif scheme == "all":
        weights[:] = 1.0 / n_layers
    else:
        first = n_layers // 2
        weights[first:] = 1.0 / (n_layers - first)

    return weights
