# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import Tensor

from ssl_mse.signal import DEFAULT_SAMPLE_RATE, Waveform

MIN_DURATION_S = 0.25
PEAK_AMPLITUDE = 0.9

F0_RANGE_HZ = (90.0, 300.0)
TILT_RANGE = (0.6, 2.0)
SEGMENT_RANGE_S = (0.08, 0.4)
FADE_S = 0.005
MAX_HARMONICS = 30


@dataclass
class TokenSource:
    r"""A synthetic source made of token segments, with its frame labels.

    Attributes:
        waveform (Waveform): rendered source.
        labels (Tensor): token id of every encoder frame, shape (floor(T / hop),).
        token_count (int): number of distinct tokens :math:`C`.
    """

    waveform: Waveform = field(metadata={"help": "rendered source."})
    labels: Tensor = field(metadata={"help": "per-frame token ids."})
    token_count: int = field(metadata={"help": "number of distinct tokens C."})

    def __post_init__(self) -> None:
        if self.labels.numel() > 0 and int(self.labels.max()) >= self.token_count:
            raise ValueError(
                f"labels must be smaller than token_count={self.token_count}."
            )


def token_f0(token_count: int) -> np.ndarray:
    """Fundamental frequency of every token, on an even grid over 90-300 Hz."""
    return np.linspace(*F0_RANGE_HZ, token_count)


def token_tilt(token_count: int) -> np.ndarray:
    """Spectral tilt exponent of every token; harmonic :math:`k` has amplitude :math:`k^{-\\text{tilt}}`."""
    grid = np.linspace(*TILT_RANGE, token_count)
    # decorrelate tilt from f0
    order = (np.arange(token_count) * 3 + 1) % token_count
    return grid[order]


def _envelope(length: int, fade: int) -> np.ndarray:
    envelope = np.ones(length)
    fade = min(fade, length // 2)
    if fade > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * (np.arange(fade) + 0.5) / fade)
        envelope[:fade] = ramp
        envelope[length - fade :] = ramp[::-1]
    return envelope


def _render_token(
    f0: float, tilt: float, length: int, sample_rate: int, rng: np.random.Generator
) -> np.ndarray:
    n_harmonics = int(min(MAX_HARMONICS, np.floor(0.45 * sample_rate / f0)))
    harmonics = np.arange(1, n_harmonics + 1)
    phases = rng.uniform(0.0, 2 * np.pi, size=n_harmonics)
    t = np.arange(length) / sample_rate

    partials = np.sin(2 * np.pi * f0 * np.outer(harmonics, t) + phases[:, None])
    segment = (harmonics ** (-tilt)) @ partials
    return segment / np.sqrt(np.mean(segment**2))


def gen_source(
    seed: int,
    duration_s: float,
    token_count: int = 8,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
    hop: int = 80,
) -> TokenSource:
    r"""Render a token-structured harmonic source.

    The source is a sequence of segments of random length (80-400 ms). Token :math:`c` is a
    harmonic stack with a fundamental frequency and spectral tilt unique to :math:`c`; segment
    boundaries are smoothed with 5 ms raised-cosine fades and the whole signal is peak-normalized
    to 0.9. Frame :math:`j` is labelled with the token sounding at sample :math:`j \cdot hop + hop/2`.

    Args:
        seed (int): random seed, the output is a deterministic function of it.
        duration_s (float): duration in seconds, at least 0.25.
        token_count (int): number of tokens :math:`C`, at least 2. Defaults to 8.
        sample_rate (int): sampling rate in Hz. Defaults to 8000.
        hop (int): encoder frame hop in samples. Defaults to 80.

    Raises:
        ValueError: if ``token_count < 2`` or ``duration_s < 0.25``.

    Returns:
        TokenSource: float64 waveform with its frame labels.
    """
    if token_count < 2:
        raise ValueError(f"token_count must be at least 2. Got {token_count}.")
    if duration_s < MIN_DURATION_S:
        raise ValueError(
            f"duration_s must be at least {MIN_DURATION_S}. Got {duration_s}."
        )

    rng = np.random.default_rng(seed)
    num_samples = int(round(duration_s * sample_rate))
    f0s, tilts = token_f0(token_count), token_tilt(token_count)
    min_len, max_len = (int(round(s * sample_rate)) for s in SEGMENT_RANGE_S)
    fade = int(round(FADE_S * sample_rate))

    signal = np.zeros(num_samples)
    sample_tokens = np.zeros(num_samples, dtype=np.int64)

    start = 0
    while start < num_samples:
        length = min(int(rng.integers(min_len, max_len + 1)), num_samples - start)
        token = int(rng.integers(token_count))
        gain = rng.uniform(0.5, 1.0)

        segment = _render_token(f0s[token], tilts[token], length, sample_rate, rng)
        signal[start : start + length] = gain * segment * _envelope(length, fade)
        sample_tokens[start : start + length] = token
        start += length

    signal *= PEAK_AMPLITUDE / np.max(np.abs(signal))

    frame_centers = np.arange(num_samples // hop) * hop + hop // 2
    labels = sample_tokens[frame_centers]

    return TokenSource(
        waveform=Waveform(torch.from_numpy(signal), sample_rate),
        labels=torch.from_numpy(labels),
        token_count=token_count,
    )
