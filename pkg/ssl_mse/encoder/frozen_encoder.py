# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple, Union

import torch
import torch.nn.functional as F
from loguru import logger
from torch import nn, Tensor

from ssl_mse.encoder.feature_stack import FeatureStack
from ssl_mse.signal import samples_of, Waveform
from ssl_mse.utils import as_batch, CheckpointError, freeze

ENERGY_FLOOR = 1e-6


@dataclass
class EncoderConfig:
    """Architecture and seed of the frozen encoder."""

    n_layers: int = field(default=8, metadata={"help": "number of residual blocks N."})
    dim: int = field(default=64, metadata={"help": "feature dimension D."})
    hop: int = field(default=80, metadata={"help": "frontend stride in samples."})
    frontend_kernel: int = field(
        default=160, metadata={"help": "samples analyzed per frame."}
    )
    seed: int = field(default=0, metadata={"help": "seed of the random frozen weights."})
    checkpoint: Optional[str] = field(
        default=None,
        metadata={"help": "encoder weights in the checkpoint format, none to draw them from seed."},
    )

    def __post_init__(self) -> None:
        for name in ("n_layers", "dim", "hop", "frontend_kernel"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1. Got {getattr(self, name)}.")


class ResidualBlock(nn.Module):
    r"""Depthwise conv (width 3) -> ReLU -> pointwise conv -> per-channel normalization, added to the input."""

    def __init__(self, dim: int) -> None:
        super().__init__()
        self.depthwise = nn.Conv1d(dim, dim, kernel_size=3, padding=1, groups=dim)
        self.pointwise = nn.Conv1d(dim, dim, kernel_size=1)
        self.norm = nn.GroupNorm(num_groups=dim, num_channels=dim)

    def forward(self, h: Tensor) -> Tensor:
        return h + self.norm(self.pointwise(F.relu(self.depthwise(h))))


def bandpass_filters(
    count: int, width: int, generator: torch.Generator, dtype: torch.dtype = torch.float32
) -> Tensor:
    r"""Random band-pass filterbank: sine-tapered cosines with center frequencies uniform in
    (0.01, 0.49) cycles per sample and random phases, each scaled to unit norm.

    Returns:
        Tensor: filters of shape (count, 1, width).
    """
    n = torch.arange(width, dtype=torch.float64)
    taper = torch.hann_window(width + 2, periodic=False, dtype=torch.float64)[1:-1]
    centers = 0.01 + 0.48 * torch.rand(count, 1, generator=generator, dtype=torch.float64)
    phases = 2 * math.pi * torch.rand(count, 1, generator=generator, dtype=torch.float64)
    filters = taper * torch.cos(2 * math.pi * centers * n + phases)
    filters = filters / filters.norm(dim=-1, keepdim=True).clamp_min(1e-12)
    return filters.unsqueeze(1).to(dtype)


class FrozenEncoder(nn.Module):
    r"""Multi-layer feature extractor with frozen random weights.

    The frontend is a random band-pass filterbank of :math:`D` filters spanning half of the
    ``frontend_kernel`` window. Frame :math:`j` holds the log mean energy of every filter output
    over the rest of the window starting at sample :math:`j \cdot hop`, so each frame summarizes
    ``frontend_kernel`` input samples. :math:`N` residual blocks follow, and the output of block
    :math:`n` is the feature :math:`F_n`. The frontend output itself is not one of the :math:`N`
    layers.

    .. code-block:: python

        encoder = init_frozen_encoder(EncoderConfig(n_layers=8, dim=64))
        stack = encoder(torch.randn(2, 8000) * 0.1)  # FeatureStack, layers (8, 2, 64, 99)

    Args:
        config (EncoderConfig): architecture and seed.
    """

    def __init__(self, config: EncoderConfig) -> None:
        super().__init__()
        self.config = config
        self.filter_width = max(1, config.frontend_kernel // 2)
        self.energy_window = config.frontend_kernel - self.filter_width + 1
        self.frontend = nn.Conv1d(1, config.dim, kernel_size=self.filter_width, bias=False)
        self.blocks = nn.ModuleList(ResidualBlock(config.dim) for _ in range(config.n_layers))

    @torch.no_grad()
    def reset_parameters(self, seed: int) -> None:
        """Draw the weights from ``seed``: a random filterbank for the frontend, fan-in scaling
        for the blocks; normalization affines start at identity."""
        generator = torch.Generator().manual_seed(seed)
        for name, param in self.named_parameters():
            if name == "frontend.weight":
                param.copy_(
                    bandpass_filters(param.shape[0], param.shape[-1], generator, param.dtype)
                )
            elif name.endswith("norm.weight"):
                param.fill_(1.0)
            elif name.endswith("bias"):
                param.zero_()
            else:
                fan_in = param[0].numel()
                param.copy_(
                    torch.randn(param.shape, generator=generator, dtype=param.dtype)
                    / math.sqrt(fan_in)
                )

    def train(self, mode: bool = True) -> "FrozenEncoder":
        # no dropout or running statistics; the encoder is always evaluated as is
        return super().train(False)

    def layer_dims(self) -> Tuple[int, int, int]:
        """Static dimensions ``(N, D, hop)``."""
        return self.config.n_layers, self.config.dim, self.config.hop

    def num_frames(self, num_samples: int) -> int:
        r""":math:`T' = \lfloor (T - K) / hop \rfloor + 1`."""
        return (num_samples - self.config.frontend_kernel) // self.config.hop + 1

    def frontend_features(self, x: Tensor) -> Tensor:
        """Log frame energies of the filterbank, shape (batch, D, T')."""
        filtered = self.frontend(as_batch(x).unsqueeze(1))
        energy = F.avg_pool1d(
            filtered.pow(2), kernel_size=self.energy_window, stride=self.config.hop
        )
        return torch.log(energy + ENERGY_FLOOR)

    def forward(self, x: Union[Waveform, Tensor]) -> FeatureStack:
        r"""Encode waveform(s) into per-layer features.

        Args:
            x (Union[Waveform, Tensor]): waveform, shape (time,) or (batch, time). Gradients flow
                back to ``x``.

        Raises:
            ValueError: if the input is shorter than the frontend kernel.

        Returns:
            FeatureStack: layers of shape (N, D, T') for a single waveform, (N, batch, D, T') for a batch.
        """
        sample_rate = x.sample_rate if isinstance(x, Waveform) else None
        samples = samples_of(x)
        if samples.shape[-1] < self.config.frontend_kernel:
            raise ValueError(
                f"input too short: {samples.shape[-1]} samples, the encoder needs at least {self.config.frontend_kernel}."
            )

        h = self.frontend_features(samples)
        layers = []
        for block in self.blocks:
            h = block(h)
            layers.append(h)
        layers = torch.stack(layers, dim=0)

        if samples.dim() == 1:
            layers = layers.squeeze(1)

        return FeatureStack(layers=layers, hop=self.config.hop, sample_rate=sample_rate)

    @classmethod
    def from_checkpoint(
        cls, path: Union[str, os.PathLike], config: EncoderConfig
    ) -> "FrozenEncoder":
        """Load externally trained encoder weights stored in the checkpoint format."""
        from ssl_mse.training.checkpoint import load_checkpoint

        tensors, _ = load_checkpoint(path)
        encoder = cls(config)
        try:
            encoder.load_state_dict(tensors)
        except RuntimeError as e:
            raise CheckpointError(
                f"{path} does not hold encoder weights for {asdict(config)}: {e}"
            ) from e
        logger.info(f"Loaded frozen encoder weights from {path}")
        return freeze(encoder)

    def to_checkpoint(self, path: Union[str, os.PathLike]) -> None:
        from ssl_mse.training.checkpoint import save_checkpoint

        save_checkpoint(path, self.state_dict(), {"seed": float(self.config.seed)})


def init_frozen_encoder(config: EncoderConfig) -> FrozenEncoder:
    """Build the encoder with weights loaded from ``config.checkpoint`` or drawn from ``config.seed``,
    and mark every parameter frozen."""
    if config.checkpoint is not None:
        return FrozenEncoder.from_checkpoint(config.checkpoint, config)
    encoder = FrozenEncoder(config)
    encoder.reset_parameters(config.seed)
    logger.debug(f"Initialized frozen encoder {asdict(config)}")
    return freeze(encoder)


def encode(encoder: FrozenEncoder, x: Union[Waveform, Tensor]) -> FeatureStack:
    """Functional alias of ``encoder(x)``."""
    return encoder(x)


def layer_dims(encoder: FrozenEncoder) -> Tuple[int, int, int]:
    """Static dimensions ``(N, D, hop)`` of ``encoder``."""
    return encoder.layer_dims()
