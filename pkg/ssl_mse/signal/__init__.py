# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from .metrics import EPS, power_db, sd_snr, si_sdr, snr_db
from .mixing import mix_at_snr, noise_gain
from .wav_io import read_wav, to_pcm16, write_wav
from .waveform import DEFAULT_SAMPLE_RATE, samples_of, Waveform

__all__ = [
    "Waveform",
    "DEFAULT_SAMPLE_RATE",
    "EPS",
    "mix_at_snr",
    "noise_gain",
    "power_db",
    "read_wav",
    "samples_of",
    "sd_snr",
    "si_sdr",
    "snr_db",
    "to_pcm16",
    "write_wav",
]
