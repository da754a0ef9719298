# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field
from typing import Union

import torch
from torch import Tensor

DEFAULT_SAMPLE_RATE = 8000


@dataclass
class Waveform:
    r"""A mono sampled signal.

    Attributes:
        samples (Tensor): real amplitudes, nominal range :math:`[-1, 1]`, shape (time,).
        sample_rate (int): sampling rate in Hz.
    """

    samples: Tensor = field(metadata={"help": "amplitudes, shape (time,)."})
    sample_rate: int = field(
        default=DEFAULT_SAMPLE_RATE, metadata={"help": "sampling rate in Hz."}
    )

    def __post_init__(self) -> None:
        if not isinstance(self.samples, Tensor):
            self.samples = torch.as_tensor(self.samples)
        if self.samples.dim() != 1:
            raise ValueError(
                f"Waveform samples must have shape (time,). Got {tuple(self.samples.shape)}."
            )
        if self.samples.numel() < 1:
            raise ValueError("Waveform must hold at least one sample.")
        if not torch.is_floating_point(self.samples):
            self.samples = self.samples.to(torch.get_default_dtype())
        if not bool(torch.isfinite(self.samples).all()):
            raise ValueError("Waveform samples must be finite.")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(
                f"sample_rate must be a positive integer. Got {self.sample_rate}."
            )
        self.sample_rate = int(self.sample_rate)

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.num_samples / self.sample_rate

    def power(self) -> Tensor:
        """Mean power :math:`\\lVert x \\rVert^2 / T`."""
        return torch.mean(self.samples**2)

    def to(self, dtype: torch.dtype) -> "Waveform":
        return Waveform(self.samples.to(dtype), self.sample_rate)

    def __len__(self) -> int:
        return self.num_samples


def samples_of(x: Union[Waveform, Tensor]) -> Tensor:
    """Return the sample tensor of a ``Waveform``, or ``x`` itself if it already is a tensor."""
    return x.samples if isinstance(x, Waveform) else x
