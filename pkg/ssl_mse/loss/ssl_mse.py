# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Union

import torch
from torch import Tensor
from torch.nn.modules.loss import _Loss

from ssl_mse.encoder import FeatureStack, FrozenEncoder
from ssl_mse.loss.layer_weights import make_layer_weights


def _layers(stack: Union[FeatureStack, Tensor]) -> Tensor:
    return stack.layers if isinstance(stack, FeatureStack) else stack


def reduce(loss: Tensor, reduction: str) -> Tensor:
    if reduction == "mean":
        return torch.mean(loss)
    elif reduction == "sum":
        return torch.sum(loss)
    elif reduction == "none":
        return loss
    else:
        raise ValueError(f"{reduction} is not a valid value for reduction")


def ssl_mse(
    features_enh: Union[FeatureStack, Tensor],
    features_clean: Union[FeatureStack, Tensor],
    layer_weights: Tensor,
) -> Tensor:
    r"""Mean squared error between weighted-sum features.

    The layers are first averaged, :math:`\overline{F} = \sum_n \tilde{w}_n F_n`, then

    .. math::

        \mathcal{L}_{\text{SSL-MSE}} = \lVert \overline{F}^{\text{enh}} - \overline{F}^{\text{clean}} \rVert_F^2 / (D T').

    The clean branch is detached: gradients flow through ``features_enh`` only.

    Args:
        features_enh (Union[FeatureStack, Tensor]): features of the enhanced signal, shape (N, ..., D, T').
        features_clean (Union[FeatureStack, Tensor]): features of the clean signal, same shape.
        layer_weights (Tensor): :math:`\tilde{w}`, shape (N,).

    Raises:
        ValueError: if the stacks or the weights do not match.

    Returns:
        Tensor: SSL-MSE per signal, shape (...).
    """
    enh, clean = _layers(features_enh), _layers(features_clean)
    if enh.shape != clean.shape:
        raise ValueError(
            f"Feature shape mismatch: {tuple(enh.shape)} vs {tuple(clean.shape)}."
        )
    if layer_weights.shape != (enh.shape[0],):
        raise ValueError(
            f"layer_weights must have shape ({enh.shape[0]},). Got {tuple(layer_weights.shape)}."
        )

    weights = layer_weights.to(dtype=enh.dtype, device=enh.device)
    mean_enh = torch.tensordot(weights, enh, dims=1)
    mean_clean = torch.tensordot(weights, clean.detach(), dims=1)

    return torch.mean((mean_enh - mean_clean) ** 2, dim=(-2, -1))


class SSLMSELoss(_Loss):
    r"""SSL-MSE between the enhanced signal and the clean source, measured through a frozen encoder.

    .. code-block:: python

        criterion = SSLMSELoss(encoder, "last")
        loss = criterion(model(noisy), clean)
        loss.backward()  # reaches the SE model only

    Args:
        encoder (FrozenEncoder): frozen feature extractor.
        layer_weights (Union[Tensor, str]): :math:`\tilde{w}` or a scheme name. Defaults to ``'last'``.
        reduction (str, optional): ``'none'`` | ``'mean'`` | ``'sum'``. Defaults to 'mean'.
    """

    def __init__(
        self,
        encoder: FrozenEncoder,
        layer_weights: Union[Tensor, str] = "last",
        reduction: str = "mean",
    ) -> None:
        super().__init__(None, None, reduction)
        self.encoder = encoder
        if isinstance(layer_weights, str):
            layer_weights = make_layer_weights(layer_weights, encoder.config.n_layers)
        self.register_buffer("layer_weights", layer_weights, persistent=False)

    def forward(self, enhanced: Tensor, clean: Tensor) -> Tensor:
        """Evaluates the loss.

        Args:
            enhanced (Tensor): enhanced waveform(s), shape (time,) or (batch, time).
            clean (Tensor): clean waveform(s), same shape.

        Raises:
            ValueError: reduction value must be one of ``'none'`` | ``'mean'`` | ``'sum'``.

        Returns:
            Tensor: SSL-MSE.
        """
        features_enh = self.encoder(enhanced)
        with torch.no_grad():
            features_clean = self.encoder(clean)

        return reduce(
            ssl_mse(features_enh, features_clean, self.layer_weights), self.reduction
        )


def ssl_mse_distance(encoder: FrozenEncoder, enhanced: Tensor, clean: Tensor) -> Tensor:
    """Evaluation distance: SSL-MSE on the last layer, without gradients, per signal."""
    with torch.no_grad():
        return ssl_mse(
            encoder(enhanced),
            encoder(clean),
            make_layer_weights("last", encoder.config.n_layers),
        )
