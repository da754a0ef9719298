# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from typing import Union

import torch
from torch import Tensor

from ssl_mse.signal.waveform import samples_of, Waveform

EPS = 1e-8


def _check_pair(estimate: Tensor, reference: Tensor) -> None:
    if estimate.shape != reference.shape:
        raise ValueError(
            f"Length mismatch between estimate and reference: {tuple(estimate.shape)} vs {tuple(reference.shape)}."
        )


def _check_nonzero(power: Tensor, what: str) -> None:
    if bool((power == 0).any()):
        raise ValueError(f"{what} has zero power.")


def sd_snr(
    estimate: Union[Waveform, Tensor],
    reference: Union[Waveform, Tensor],
    eps: float = EPS,
) -> Tensor:
    r"""Scale-dependent signal-to-noise ratio in dB.

    .. math::

        \text{SD-SNR}(\hat{x}, x) = 10 \log_{10} \frac{\lVert x \rVert^2}{\lVert x - \hat{x} \rVert^2 + \epsilon \lVert x \rVert^2}

    The relative floor :math:`\epsilon` caps the value at :math:`-10\log_{10}\epsilon` (80 dB for the default)
    on perfect reconstruction.

    Args:
        estimate (Union[Waveform, Tensor]): estimated signal, shape (..., time).
        reference (Union[Waveform, Tensor]): reference signal, shape (..., time).
        eps (float): relative floor. Defaults to 1e-8.

    Raises:
        ValueError: if shapes differ or a reference has zero power.

    Returns:
        Tensor: SD-SNR per signal, shape (...).
    """
    estimate, reference = samples_of(estimate), samples_of(reference)
    _check_pair(estimate, reference)

    reference_power = torch.sum(reference**2, dim=-1)
    _check_nonzero(reference_power, "reference")
    error_power = torch.sum((reference - estimate) ** 2, dim=-1)

    return 10 * torch.log10(reference_power / (error_power + eps * reference_power))


def si_sdr(
    estimate: Union[Waveform, Tensor],
    reference: Union[Waveform, Tensor],
    eps: float = EPS,
) -> Tensor:
    r"""Scale-invariant source-to-distortion ratio in dB.

    The estimate is projected on the reference, :math:`s = \frac{\langle \hat{x}, x\rangle}{\lVert x\rVert^2} x`, and

    .. math::

        \text{SI-SDR}(\hat{x}, x) = 10 \log_{10} \frac{\lVert s \rVert^2}{\lVert \hat{x} - s \rVert^2 + \epsilon \lVert s \rVert^2}.

    The value is invariant to positive scaling of the estimate.

    Args:
        estimate (Union[Waveform, Tensor]): estimated signal, shape (..., time).
        reference (Union[Waveform, Tensor]): reference signal, shape (..., time).
        eps (float): relative floor. Defaults to 1e-8.

    Raises:
        ValueError: if shapes differ or a reference has zero power.

    Returns:
        Tensor: SI-SDR per signal, shape (...).
    """
    estimate, reference = samples_of(estimate), samples_of(reference)
    _check_pair(estimate, reference)

    reference_power = torch.sum(reference**2, dim=-1, keepdim=True)
    _check_nonzero(reference_power, "reference")

    scaling = torch.sum(estimate * reference, dim=-1, keepdim=True) / reference_power
    target = scaling * reference
    residual = estimate - target

    target_power = torch.sum(target**2, dim=-1)
    residual_power = torch.sum(residual**2, dim=-1)

    return 10 * torch.log10(target_power / (residual_power + eps * target_power))


def snr_db(
    signal: Union[Waveform, Tensor], noise: Union[Waveform, Tensor]
) -> Tensor:
    r"""Power ratio :math:`10 \log_{10} (P_{\text{signal}} / P_{\text{noise}})` in dB, shape (...)."""
    signal, noise = samples_of(signal), samples_of(noise)
    _check_pair(signal, noise)
    return 10 * torch.log10(torch.sum(signal**2, dim=-1) / torch.sum(noise**2, dim=-1))


def power_db(x: Union[Waveform, Tensor]) -> Tensor:
    """Mean power in dB, shape (...)."""
    x = samples_of(x)
    return 10 * torch.log10(torch.mean(x**2, dim=-1))
