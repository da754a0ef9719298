# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import asdict, dataclass, field
from typing import Union

import torch
import torch.nn.functional as F
from loguru import logger
from torch import nn, Tensor

from ssl_mse.signal import samples_of, Waveform
from ssl_mse.utils import num_parameters


@dataclass
class SEConfig:
    r"""Hyperparameters of the mask-based time-domain enhancement network.

    Defaults are the desk-scale setting; :meth:`full_scale` returns the full-scale one.
    """

    basis: int = field(default=128, metadata={"help": "number of basis filters N_b."})
    window: int = field(default=32, metadata={"help": "basis window L in samples, even."})
    bottleneck: int = field(default=32, metadata={"help": "bottleneck channels B."})
    repeats: int = field(default=2, metadata={"help": "number of repeats R."})
    blocks: int = field(default=4, metadata={"help": "conv blocks per repeat X."})
    hidden: int = field(default=64, metadata={"help": "conv block channels H."})
    kernel: int = field(default=3, metadata={"help": "depthwise kernel size P."})
    encoder_activation: str = field(
        default="relu", metadata={"help": "basis activation, 'relu' or 'linear'."}
    )

    def __post_init__(self) -> None:
        for name in ("basis", "window", "bottleneck", "repeats", "blocks", "hidden", "kernel"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1. Got {getattr(self, name)}.")
        if self.window % 2 != 0:
            raise ValueError(f"window must be even. Got {self.window}.")
        if self.encoder_activation not in ("relu", "linear"):
            raise ValueError(
                f"{self.encoder_activation} is not a valid encoder_activation, expected 'relu' or 'linear'."
            )

    @property
    def stride(self) -> int:
        return self.window // 2

    @classmethod
    def full_scale(cls) -> "SEConfig":
        return cls(basis=4096, window=320, bottleneck=256, repeats=4, blocks=8, hidden=512, kernel=3)


class TemporalBlock(nn.Module):
    r"""1x1 conv -> PReLU -> gLN -> dilated depthwise conv -> PReLU -> gLN -> 1x1 conv, with a residual path."""

    def __init__(self, bottleneck: int, hidden: int, kernel: int, dilation: int) -> None:
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv1d(bottleneck, hidden, 1),
            nn.PReLU(),
            nn.GroupNorm(1, hidden),
            nn.Conv1d(
                hidden,
                hidden,
                kernel,
                padding=(kernel - 1) * dilation // 2,
                dilation=dilation,
                groups=hidden,
            ),
            nn.PReLU(),
            nn.GroupNorm(1, hidden),
            nn.Conv1d(hidden, bottleneck, 1),
        )

    def forward(self, x: Tensor) -> Tensor:
        out = self.net(x)
        # even kernels with odd dilation lose one frame
        return x + out[..., : x.shape[-1]]


class ConvTasNet(nn.Module):
    r"""Mask-based time-domain enhancement network: learned basis -> sigmoid mask -> learned decoder.

    The input is framed with 50% overlap (stride :math:`L/2`), padded so that every input sample is
    covered by two frames, and the decoder output is trimmed back to the input length.

    .. code-block:: python

        model = init_se_model(SEConfig(), seed=0)
        enhanced = model(noisy)  # same shape as noisy, (time,) or (batch, time)

    Args:
        config (SEConfig): hyperparameters.
    """

    def __init__(self, config: SEConfig) -> None:
        super().__init__()
        self.config = config
        stride = config.stride

        self.encoder = nn.Conv1d(1, config.basis, config.window, stride=stride, bias=False)

        blocks = [
            TemporalBlock(config.bottleneck, config.hidden, config.kernel, dilation=2**x)
            for _ in range(config.repeats)
            for x in range(config.blocks)
        ]
        self.separator = nn.Sequential(
            nn.GroupNorm(1, config.basis),
            nn.Conv1d(config.basis, config.bottleneck, 1),
            *blocks,
            nn.PReLU(),
            nn.Conv1d(config.bottleneck, config.basis, 1),
        )

        self.decoder = nn.ConvTranspose1d(
            config.basis, 1, config.window, stride=stride, bias=False
        )

    def _pad(self, x: Tensor) -> Tensor:
        stride = self.config.stride
        rest = (-x.shape[-1]) % stride
        return F.pad(x, (stride, stride + rest))

    def encode(self, x: Tensor) -> Tensor:
        """Basis coefficients of the padded input (batch, time) -> (batch, N_b, frames)."""
        w = self.encoder(self._pad(x).unsqueeze(1))
        return F.relu(w) if self.config.encoder_activation == "relu" else w

    def estimate_mask(self, w: Tensor) -> Tensor:
        """Mask in (0, 1) of the same shape as ``w``."""
        return torch.sigmoid(self.separator(w))

    def decode(self, w: Tensor, num_samples: int) -> Tensor:
        """Overlap-add the coefficients and trim to ``num_samples``, (batch, N_b, frames) -> (batch, time)."""
        stride = self.config.stride
        out = self.decoder(w).squeeze(1)
        return out[..., stride : stride + num_samples]

    def forward(self, y: Tensor) -> Tensor:
        r"""Enhance :math:`\hat{x} = \text{SE}(y)`.

        Args:
            y (Tensor): noisy waveform, shape (time,) or (batch, time).

        Raises:
            ValueError: if the input is shorter than one window.

        Returns:
            Tensor: enhanced waveform with the shape of ``y``.
        """
        if y.shape[-1] < self.config.window:
            raise ValueError(
                f"input shorter than one window: {y.shape[-1]} < {self.config.window} samples."
            )
        single = y.dim() == 1
        if single:
            y = y.unsqueeze(0)

        w = self.encode(y)
        x_hat = self.decode(w * self.estimate_mask(w), y.shape[-1])

        return x_hat.squeeze(0) if single else x_hat


def init_se_model(config: SEConfig, seed: int) -> ConvTasNet:
    """Build the enhancement network with parameters drawn from ``seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = ConvTasNet(config)
    logger.info(f"SE model {asdict(config)} with {num_parameters(model)} parameters")
    return model


def enhance(model: ConvTasNet, y: Union[Waveform, Tensor]) -> Union[Waveform, Tensor]:
    """Run ``model`` on a waveform without tracking gradients; a ``Waveform`` input gives a ``Waveform``."""
    with torch.no_grad():
        out = model(samples_of(y))
    if isinstance(y, Waveform):
        return Waveform(out, y.sample_rate)
    return out
