# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Union

import torch
from torch import nn, Tensor

from ssl_mse.encoder import FrozenEncoder
from ssl_mse.loss.layer_weights import make_layer_weights, normalize_scheme
from ssl_mse.loss.snr import snr_training_loss
from ssl_mse.loss.ssl_mse import ssl_mse
from ssl_mse.signal import EPS
from ssl_mse.utils import NonFiniteLossError


@dataclass
class LossConfig:
    """Training objective of the fine-tuning stage."""

    alpha: float = field(default=0.1, metadata={"help": "multitask weight of the SNR term."})
    scheme: str = field(default="last", metadata={"help": "layer-weight scheme."})
    eps: float = field(default=EPS, metadata={"help": "relative floor of the SNR."})

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative. Got {self.alpha}.")
        self.scheme = normalize_scheme(self.scheme)


@dataclass
class LossBreakdown:
    r"""Terms of the multitask loss :math:`\mathcal{L} = \mathcal{L}_{\text{SSL-MSE}} + \alpha \mathcal{L}_{\text{SNR}}`.

    Attributes:
        ssl_mse (Tensor): SSL-MSE term.
        snr_term (Tensor): SNR loss term in dB (negated SNR).
        total (Tensor): weighted total.
    """

    ssl_mse: Tensor = field(metadata={"help": "SSL-MSE term."})
    snr_term: Tensor = field(metadata={"help": "SNR loss term in dB."})
    total: Tensor = field(metadata={"help": "ssl_mse + alpha * snr_term."})

    def as_floats(self) -> Dict[str, float]:
        return {
            "ssl_mse": self.ssl_mse.detach().item(),
            "snr_term": self.snr_term.detach().item(),
            "total": self.total.detach().item(),
        }


def multitask_loss(
    ssl_mse_value: Union[float, Tensor],
    snr_loss_value: Union[float, Tensor],
    alpha: Union[float, Tensor],
) -> LossBreakdown:
    r"""Combine the two terms, :math:`\mathcal{L} = \mathcal{L}_{\text{SSL-MSE}} + \alpha \mathcal{L}_{\text{SNR}}`.

    Args:
        ssl_mse_value (Union[float, Tensor]): SSL-MSE term.
        snr_loss_value (Union[float, Tensor]): SNR loss term.
        alpha (Union[float, Tensor]): nonnegative SNR weight.

    Raises:
        ValueError: if ``alpha`` is negative.

    Returns:
        LossBreakdown: the three values.
    """
    if bool(torch.as_tensor(alpha) < 0):
        raise ValueError(f"alpha must be nonnegative. Got {alpha}.")
    ssl_mse_value = torch.as_tensor(ssl_mse_value)
    snr_loss_value = torch.as_tensor(snr_loss_value)

    return LossBreakdown(
        ssl_mse=ssl_mse_value,
        snr_term=snr_loss_value,
        total=ssl_mse_value + alpha * snr_loss_value,
    )


class MultitaskLoss(nn.Module):
    r"""Multitask objective of SSL-MSE fine-tuning, averaged over the batch.

    Args:
        encoder (FrozenEncoder): frozen feature extractor.
        config (LossConfig): SNR weight, layer-weight scheme and floor.
    """

    def __init__(self, encoder: FrozenEncoder, config: LossConfig) -> None:
        super().__init__()
        self.encoder = encoder
        self.config = config
        self.register_buffer(
            "layer_weights",
            make_layer_weights(config.scheme, encoder.config.n_layers),
            persistent=False,
        )

    def forward(self, enhanced: Tensor, clean: Tensor) -> LossBreakdown:
        features_enh = self.encoder(enhanced)
        with torch.no_grad():
            features_clean = self.encoder(clean)

        ssl_mse_value = torch.mean(ssl_mse(features_enh, features_clean, self.layer_weights))
        snr_value = torch.mean(snr_training_loss(enhanced, clean, self.config.eps))

        return multitask_loss(ssl_mse_value, snr_value, self.config.alpha)


def loss_gradients(
    model: nn.Module,
    batch: Sequence[Tensor],
    encoder: FrozenEncoder,
    config: LossConfig,
    batch_id: Optional[int] = None,
) -> Dict[str, Optional[Tensor]]:
    r"""Gradients of the mean multitask loss over ``batch`` w.r.t. every trainable SE parameter.

    Encoder parameters are frozen and never appear in the result.

    Args:
        model (nn.Module): SE model.
        batch (Sequence[Tensor]): ``(noisy, clean, ...)`` waveforms, shape (batch, time).
        encoder (FrozenEncoder): frozen feature extractor.
        config (LossConfig): objective.
        batch_id (Optional[int]): reported if the loss is not finite.

    Raises:
        NonFiniteLossError: if the loss is not finite.

    Returns:
        Dict[str, Optional[Tensor]]: gradient per parameter name, ``None`` for a parameter outside the graph.
    """
    noisy, clean = batch[0], batch[1]
    breakdown = MultitaskLoss(encoder, config)(model(noisy), clean)
    if not bool(torch.isfinite(breakdown.total)):
        raise NonFiniteLossError("loss_gradients", batch=batch_id)

    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad]
    grads = torch.autograd.grad(
        breakdown.total, [p for _, p in named], allow_unused=True
    )
    return {name: grad for (name, _), grad in zip(named, grads)}
