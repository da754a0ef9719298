# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import math
from typing import Tuple, Union

import torch
from torch import Tensor

from ssl_mse.signal.waveform import Waveform


def noise_gain(
    source: Tensor, noise: Tensor, snr_db: Union[float, Tensor]
) -> Tensor:
    r"""Gain :math:`g` such that :math:`10 \log_{10} \frac{P_s}{g^2 P_n} = \text{snr\_db}`.

    Args:
        source (Tensor): source signal, shape (..., time).
        noise (Tensor): noise signal, shape (..., time).
        snr_db (Union[float, Tensor]): target SNR in dB, scalar or shape (...).

    Raises:
        ValueError: if shapes differ or either signal has zero power.

    Returns:
        Tensor: gain, shape (...).
    """
    if source.shape != noise.shape:
        raise ValueError(
            f"Length mismatch between source and noise: {tuple(source.shape)} vs {tuple(noise.shape)}."
        )
    source_power = torch.mean(source**2, dim=-1)
    noise_power = torch.mean(noise**2, dim=-1)
    if bool((source_power == 0).any()):
        raise ValueError("source has zero power, the noise gain is undefined.")
    if bool((noise_power == 0).any()):
        raise ValueError("noise has zero power, the noise gain is undefined.")

    snr_db = torch.as_tensor(snr_db, dtype=source.dtype, device=source.device)
    return torch.sqrt(source_power / (noise_power * 10 ** (snr_db / 10)))


def mix_at_snr(
    source: Waveform, noise: Waveform, snr_db: float
) -> Tuple[Waveform, Waveform]:
    r"""Add ``noise`` to ``source`` at the requested SNR.

    | given a source, a noise and a target SNR,
    | returns :math:`y = x + g n` and the scaled noise :math:`g n`.

    Args:
        source (Waveform): clean source.
        noise (Waveform): interferer of the same length and sample rate.
        snr_db (float): target SNR in dB.

    Raises:
        ValueError: on length or sample-rate mismatch, non-finite SNR or zero-power inputs.

    Returns:
        Tuple[Waveform, Waveform]: mixture and scaled noise.
    """
    if source.sample_rate != noise.sample_rate:
        raise ValueError(
            f"Sample rate mismatch: {source.sample_rate} vs {noise.sample_rate}."
        )
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite. Got {snr_db}.")

    gain = noise_gain(source.samples, noise.samples, snr_db)
    scaled_noise = gain * noise.samples

    return (
        Waveform(source.samples + scaled_noise, source.sample_rate),
        Waveform(scaled_noise, source.sample_rate),
    )
