# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import hashlib
from typing import Iterable

import torch
from torch import nn, Tensor


def as_batch(x: Tensor) -> Tensor:
    """View a waveform ``(time,)`` or batch ``(batch, time)`` as ``(batch, time)``."""
    assert x.dim() in (1, 2), f"Expected shape (time,) or (batch, time). Got {x.shape}."
    return x.unsqueeze(0) if x.dim() == 1 else x


def num_parameters(module: nn.Module, trainable_only: bool = False) -> int:
    """Number of scalar parameters of ``module``."""
    return sum(
        p.numel()
        for p in module.parameters()
        if p.requires_grad or not trainable_only
    )


def freeze(module: nn.Module) -> nn.Module:
    """Exclude every parameter of ``module`` from gradient updates and switch it to eval mode."""
    module.requires_grad_(False)
    module.eval()
    return module


def parameters_checksum(named_tensors: Iterable) -> str:
    r"""SHA-256 over names, shapes and float32 little-endian values of ``named_tensors``.

    Args:
        named_tensors (Iterable): an ``nn.Module`` or an iterable of ``(name, tensor)`` pairs.

    Returns:
        str: hex digest.
    """
    if isinstance(named_tensors, nn.Module):
        named_tensors = named_tensors.state_dict().items()

    digest = hashlib.sha256()
    for name, tensor in named_tensors:
        array = tensor.detach().cpu().to(torch.float32).contiguous().numpy()
        digest.update(name.encode("utf-8"))
        digest.update(repr(tuple(array.shape)).encode("utf-8"))
        digest.update(array.astype("<f4").tobytes())
    return digest.hexdigest()
