# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import os
from typing import Union

import numpy as np
import soundfile as sf
import torch

from ssl_mse.signal.waveform import Waveform

PCM16_SCALE = 32768.0


def read_wav(path: Union[str, os.PathLike]) -> Waveform:
    """Read a mono 16-bit PCM WAV file.

    Samples are scaled to :math:`[-1, 1)` by 1/32768.

    Args:
        path (Union[str, os.PathLike]): file to read.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        ValueError: on a malformed header, more than one channel or a subtype other than 16-bit PCM.

    Returns:
        Waveform: float32 waveform.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"No such WAV file: {path}")
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise ValueError(f"malformed WAV header in {path}: {e}") from e

    if info.channels != 1:
        raise ValueError(f"unsupported channels: {info.channels} in {path}")
    if info.subtype != "PCM_16":
        raise ValueError(f"unsupported bit depth: {info.subtype} in {path}")

    words, sample_rate = sf.read(str(path), dtype="int16", always_2d=False)
    samples = torch.from_numpy(words.astype(np.float32) / PCM16_SCALE)

    return Waveform(samples, sample_rate)


def to_pcm16(waveform: Waveform) -> np.ndarray:
    """16-bit words of ``waveform``: rounded, scaled by 32768 and clipped to the int16 range."""
    samples = waveform.samples.detach().cpu().to(torch.float64).numpy()
    return np.clip(np.round(samples * PCM16_SCALE), -32768, 32767).astype(np.int16)


def write_wav(path: Union[str, os.PathLike], waveform: Waveform) -> None:
    """Write ``waveform`` as a mono 16-bit PCM WAV file.

    Args:
        path (Union[str, os.PathLike]): destination, its parent directory must exist.
        waveform (Waveform): signal to write.

    Raises:
        FileNotFoundError: if the parent directory does not exist.
    """
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"Parent directory does not exist: {parent}")

    sf.write(
        str(path), to_pcm16(waveform), waveform.sample_rate, subtype="PCM_16", format="WAV"
    )
