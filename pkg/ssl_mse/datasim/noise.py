# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import numpy as np
import torch
from scipy import signal as sps

from ssl_mse.datasim.sources import MIN_DURATION_S, PEAK_AMPLITUDE
from ssl_mse.signal import DEFAULT_SAMPLE_RATE, Waveform

FILTER_ORDER = 4
MIN_BANDWIDTH_HZ = 400.0
TONE_PROBABILITY = 0.5


def gen_noise(
    seed: int, duration_s: float, sample_rate: int = DEFAULT_SAMPLE_RATE
) -> Waveform:
    r"""Render a band-filtered Gaussian noise, optionally with an amplitude-modulated tone.

    The band edges are drawn at random (at least 400 Hz apart), the Butterworth filter's
    transient is discarded, and the result is peak-normalized to 0.9, so its power lies in
    :math:`(0, 1]`.

    Args:
        seed (int): random seed, the output is a deterministic function of it.
        duration_s (float): duration in seconds, at least 0.25.
        sample_rate (int): sampling rate in Hz. Defaults to 8000.

    Raises:
        ValueError: if ``duration_s < 0.25``.

    Returns:
        Waveform: float64 noise.
    """
    if duration_s < MIN_DURATION_S:
        raise ValueError(
            f"duration_s must be at least {MIN_DURATION_S}. Got {duration_s}."
        )

    rng = np.random.default_rng(seed)
    num_samples = int(round(duration_s * sample_rate))
    transient = sample_rate // 10
    nyquist = sample_rate / 2

    low = rng.uniform(50.0, 0.4 * nyquist)
    high = rng.uniform(low + MIN_BANDWIDTH_HZ, 0.95 * nyquist)
    sos = sps.butter(
        FILTER_ORDER, [low, high], btype="bandpass", fs=sample_rate, output="sos"
    )
    noise = sps.sosfilt(sos, rng.standard_normal(num_samples + transient))[transient:]
    noise /= np.std(noise)

    if rng.uniform() < TONE_PROBABILITY:
        t = np.arange(num_samples) / sample_rate
        frequency = rng.uniform(100.0, 0.8 * nyquist)
        rate = rng.uniform(0.5, 4.0)
        depth = rng.uniform(0.3, 1.0)
        level = rng.uniform(0.2, 0.6)
        phase, mod_phase = rng.uniform(0.0, 2 * np.pi, size=2)

        modulation = 1.0 + depth * np.sin(2 * np.pi * rate * t + mod_phase)
        tone = np.sin(2 * np.pi * frequency * t + phase)
        noise = noise + np.sqrt(2) * level * modulation / (1.0 + depth) * tone

    noise *= PEAK_AMPLITUDE / np.max(np.abs(noise))

    return Waveform(torch.from_numpy(noise), sample_rate)
