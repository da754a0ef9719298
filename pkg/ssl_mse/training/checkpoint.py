# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import io
import os
import struct
import tempfile
from collections import OrderedDict
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
import torch
from torch import Tensor

from ssl_mse.utils import CheckpointError

MAGIC = b"SAE1"
VERSION = 1


def _pack_name(buffer: io.BytesIO, name: str) -> None:
    encoded = name.encode("utf-8")
    buffer.write(struct.pack("<H", len(encoded)))
    buffer.write(encoded)


def serialize_checkpoint(
    tensors: Union[Mapping[str, Tensor], Iterable[Tuple[str, Tensor]]],
    state: Optional[Mapping[str, float]] = None,
) -> bytes:
    r"""Encode named tensors and state scalars in the checkpoint binary format.

    Layout (little-endian): magic ``SAE1``, u32 version, u32 tensor count, then per tensor
    ``{u16 name length, name, u8 ndim, u32 dims..., f32 data}``, then u32 scalar count and per
    scalar ``{u16 name length, name, f64 value}``.

    Raises:
        CheckpointError: on duplicate tensor names.
    """
    items = list(tensors.items() if isinstance(tensors, Mapping) else tensors)
    names = [name for name, _ in items]
    if len(set(names)) != len(names):
        duplicates = sorted({name for name in names if names.count(name) > 1})
        raise CheckpointError(f"duplicate tensor names: {duplicates}")
    state = dict(state or {})

    buffer = io.BytesIO()
    buffer.write(MAGIC)
    buffer.write(struct.pack("<II", VERSION, len(items)))
    for name, tensor in items:
        array = tensor.detach().cpu().to(torch.float32).contiguous().numpy()
        _pack_name(buffer, name)
        buffer.write(struct.pack("<B", array.ndim))
        buffer.write(struct.pack(f"<{array.ndim}I", *array.shape))
        buffer.write(array.astype("<f4").tobytes())

    buffer.write(struct.pack("<I", len(state)))
    for name, value in state.items():
        _pack_name(buffer, name)
        buffer.write(struct.pack("<d", float(value)))

    return buffer.getvalue()


def save_checkpoint(
    path: Union[str, os.PathLike],
    tensors: Union[Mapping[str, Tensor], Iterable[Tuple[str, Tensor]]],
    state: Optional[Mapping[str, float]] = None,
) -> None:
    """Atomically write a checkpoint: the bytes go to a temporary file in the same directory, which is then renamed.

    Args:
        path (Union[str, os.PathLike]): destination file.
        tensors (Union[Mapping[str, Tensor], Iterable[Tuple[str, Tensor]]]): named tensors, stored as float32.
        state (Optional[Mapping[str, float]]): training-state scalars, e.g. epoch, lr, best dev loss.
    """
    payload = serialize_checkpoint(tensors, state)
    directory = os.path.dirname(os.path.abspath(path))
    with tempfile.NamedTemporaryFile("wb", dir=directory, delete=False) as f:
        f.write(payload)
        tmp_name = f.name
    try:
        os.replace(tmp_name, path)
    except OSError:
        os.unlink(tmp_name)
        raise


class _Reader:
    def __init__(self, payload: bytes) -> None:
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointError(
                f"truncated checkpoint: needed {size} bytes at offset {self.offset}, file has {len(self.payload)}."
            )
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def name(self) -> str:
        (length,) = self.unpack("<H")
        return self.take(length).decode("utf-8")


def deserialize_checkpoint(payload: bytes) -> Tuple[Dict[str, Tensor], Dict[str, float]]:
    """Inverse of :func:`serialize_checkpoint`.

    Raises:
        CheckpointError: on bad magic, unsupported version, truncation, duplicate names or trailing bytes.
    """
    reader = _Reader(payload)
    magic = reader.take(len(MAGIC))
    if magic != MAGIC:
        raise CheckpointError(
            f"checkpoint version error: bad magic {magic!r}, expected {MAGIC!r}."
        )
    version, count = reader.unpack("<II")
    if version != VERSION:
        raise CheckpointError(
            f"checkpoint version error: version {version} is not supported, expected {VERSION}."
        )

    tensors: Dict[str, Tensor] = OrderedDict()
    for _ in range(count):
        name = reader.name()
        if name in tensors:
            raise CheckpointError(f"duplicate tensor names: ['{name}']")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape)
        tensors[name] = torch.from_numpy(data.astype(np.float32))

    (n_scalars,) = reader.unpack("<I")
    state: Dict[str, float] = OrderedDict()
    for _ in range(n_scalars):
        name = reader.name()
        (state[name],) = reader.unpack("<d")

    if reader.offset != len(payload):
        raise CheckpointError(
            f"trailing bytes in checkpoint: {len(payload) - reader.offset} unread."
        )
    return tensors, state


def load_checkpoint(
    path: Union[str, os.PathLike],
) -> Tuple[Dict[str, Tensor], Dict[str, float]]:
    """Read a checkpoint written by :func:`save_checkpoint`.

    Returns:
        Tuple[Dict[str, Tensor], Dict[str, float]]: named float32 tensors and state scalars, in file order.
    """
    with open(path, "rb") as f:
        return deserialize_checkpoint(f.read())
