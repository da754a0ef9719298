# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field
from typing import Optional

from torch import Tensor


@dataclass
class FeatureStack:
    r"""Per-layer features :math:`F_{1:N}` of a frozen encoder.

    Attributes:
        layers (Tensor): features of every layer, shape (N, D, T') for a single waveform or
            (N, batch, D, T') for a batch.
        hop (int): samples per frame.
        sample_rate (Optional[int]): sampling rate of the encoded waveform, if known.
    """

    layers: Tensor = field(metadata={"help": "features, shape (N, [batch,] D, T')."})
    hop: int = field(metadata={"help": "samples per frame."})
    sample_rate: Optional[int] = field(
        default=None, metadata={"help": "sampling rate of the encoded waveform."}
    )

    def __post_init__(self) -> None:
        assert self.layers.dim() in (
            3,
            4,
        ), f"FeatureStack layers must have shape (N, [batch,] D, T'). Got {tuple(self.layers.shape)}."

    @property
    def n_layers(self) -> int:
        return self.layers.shape[0]

    @property
    def dim(self) -> int:
        return self.layers.shape[-2]

    @property
    def num_frames(self) -> int:
        return self.layers.shape[-1]

    @property
    def frame_rate(self) -> Optional[float]:
        """Frames per second, if the sampling rate is known."""
        return None if self.sample_rate is None else self.sample_rate / self.hop

    def layer(self, n: int) -> Tensor:
        """Features of layer ``n``, counted from 1 as :math:`F_n`."""
        assert 1 <= n <= self.n_layers, f"layer index must be in [1, {self.n_layers}]. Got {n}."
        return self.layers[n - 1]
