# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from torch import Tensor
from torch.nn.modules.loss import _Loss

from ssl_mse.loss.ssl_mse import reduce
from ssl_mse.signal import EPS, sd_snr


def snr_training_loss(estimate: Tensor, reference: Tensor, eps: float = EPS) -> Tensor:
    r"""Negated scale-dependent SNR, :math:`-\text{SD-SNR}(\hat{x}, x)`, per signal.

    Minimizing it increases the SNR of the estimate.

    Args:
        estimate (Tensor): :math:`\hat{x}`, shape (..., time).
        reference (Tensor): :math:`x`, shape (..., time).
        eps (float): relative floor of the SNR. Defaults to 1e-8.

    Returns:
        Tensor: loss in dB, shape (...).
    """
    return -sd_snr(estimate, reference, eps=eps)


class SNRLoss(_Loss):
    """Negated scale-dependent SNR loss.

    Args:
        eps (float): relative floor of the SNR. Defaults to 1e-8.
        reduction (str, optional): ``'none'`` | ``'mean'`` | ``'sum'``. Defaults to 'mean'.
    """

    def __init__(self, eps: float = EPS, reduction: str = "mean") -> None:
        super().__init__(None, None, reduction)
        self.eps = eps

    def forward(self, estimate: Tensor, reference: Tensor) -> Tensor:
        return reduce(snr_training_loss(estimate, reference, self.eps), self.reduction)
