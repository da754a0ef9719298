# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import torch
from loguru import logger
from torch import nn, Tensor

from ssl_mse.encoder import EncoderConfig, init_frozen_encoder
from ssl_mse.loss import LossConfig, MultitaskLoss
from ssl_mse.model import init_se_model, SEConfig
from ssl_mse.utils import num_parameters

MAX_PARAMETERS = 5000

TINY_SE_CONFIG = SEConfig(
    basis=8, window=8, bottleneck=4, repeats=1, blocks=2, hidden=8, kernel=3
)
TINY_ENCODER_CONFIG = EncoderConfig(n_layers=2, dim=8, hop=16, frontend_kernel=32, seed=0)


@dataclass
class GradCheckResult:
    """Agreement of analytic and finite-difference gradients."""

    max_relative_error: float = field(
        metadata={"help": "largest relative error over the parameter tensors."}
    )
    relative_errors: Dict[str, float] = field(
        metadata={"help": r"per tensor, :math:`\lVert a - n \rVert / \max(\lVert a \rVert, \lVert n \rVert)`."}
    )
    num_parameters: int = field(metadata={"help": "scalar parameters checked."})


def finite_difference_check(
    model: nn.Module, loss_fn: Callable[[], Tensor], step: float = 1e-3
) -> GradCheckResult:
    r"""Compare autograd gradients of ``loss_fn`` with central differences
    :math:`(f(\theta + h e_i) - f(\theta - h e_i)) / 2h` for every trainable parameter of ``model``.

    Each parameter is perturbed in place and restored exactly. Run the model in float64.

    Args:
        model (nn.Module): module whose trainable parameters are checked.
        loss_fn (Callable[[], Tensor]): scalar loss of the current parameters.
        step (float): finite-difference step :math:`h`. Defaults to 1e-3.

    Raises:
        ValueError: if the model is too large or the analytic gradient is not finite.

    Returns:
        GradCheckResult: per-tensor and maximum relative errors.
    """
    named = [(name, p) for name, p in model.named_parameters() if p.requires_grad]
    total = sum(p.numel() for _, p in named)
    if total > MAX_PARAMETERS:
        raise ValueError(
            f"finite differences need at most {MAX_PARAMETERS} parameters. Got {total}."
        )

    grads = torch.autograd.grad(loss_fn(), [p for _, p in named], allow_unused=True)

    relative_errors = {}
    with torch.no_grad():
        for (name, p), grad in zip(named, grads):
            analytic = torch.zeros_like(p) if grad is None else grad
            if not bool(torch.isfinite(analytic).all()):
                raise ValueError(f"non-finite analytic gradient for {name}.")

            numeric = torch.zeros_like(p)
            flat, flat_numeric = p.view(-1), numeric.view(-1)
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + step
                f_plus = float(loss_fn())
                flat[i] = original - step
                f_minus = float(loss_fn())
                flat[i] = original
                flat_numeric[i] = (f_plus - f_minus) / (2 * step)

            scale = max(float(analytic.norm()), float(numeric.norm()), 1e-12)
            relative_errors[name] = float((analytic - numeric).norm()) / scale

    max_error = max(relative_errors.values(), default=0.0)
    return GradCheckResult(
        max_relative_error=max_error, relative_errors=relative_errors, num_parameters=total
    )


def grad_check(
    se_config: Optional[SEConfig] = None,
    encoder_config: Optional[EncoderConfig] = None,
    loss_config: Optional[LossConfig] = None,
    seed: int = 0,
    step: float = 1e-3,
    batch_size: int = 2,
    num_samples: int = 256,
) -> GradCheckResult:
    r"""Finite-difference check of the multitask loss w.r.t. the SE parameters, in float64.

    The SE model and the frozen encoder are built from their configs (small by default), the
    inputs are random noisy/clean pairs drawn from ``seed``.

    Args:
        se_config (Optional[SEConfig]): SE model, at most 5000 parameters.
        encoder_config (Optional[EncoderConfig]): frozen encoder.
        loss_config (Optional[LossConfig]): objective, defaults to :class:`LossConfig`.
        seed (int): seed of the parameters and inputs. Defaults to 0.
        step (float): finite-difference step. Defaults to 1e-3.
        batch_size (int): utterances in the batch. Defaults to 2.
        num_samples (int): samples per utterance. Defaults to 256.

    Returns:
        GradCheckResult: the comparison.
    """
    se_config = se_config or TINY_SE_CONFIG
    encoder_config = encoder_config or TINY_ENCODER_CONFIG
    loss_config = loss_config or LossConfig()

    model = init_se_model(se_config, seed).double()
    encoder = init_frozen_encoder(encoder_config).double()
    if num_parameters(model, trainable_only=True) > MAX_PARAMETERS:
        raise ValueError(
            f"SE config has {num_parameters(model)} parameters, at most {MAX_PARAMETERS} are supported."
        )

    generator = torch.Generator().manual_seed(seed)
    clean = 0.5 * torch.randn(batch_size, num_samples, generator=generator, dtype=torch.float64)
    noisy = clean + 0.3 * torch.randn(
        batch_size, num_samples, generator=generator, dtype=torch.float64
    )
    criterion = MultitaskLoss(encoder, loss_config)

    result = finite_difference_check(
        model, lambda: criterion(model(noisy), clean).total, step
    )
    logger.info(
        f"Gradient check (alpha={loss_config.alpha}, scheme={loss_config.scheme}): "
        f"max relative error {result.max_relative_error:.3e} over {result.num_parameters} parameters"
    )
    return result
