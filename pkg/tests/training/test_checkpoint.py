# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import os
import struct
import tempfile
import unittest

import torch
from ssl_mse.training import (
    deserialize_checkpoint,
    load_checkpoint,
    save_checkpoint,
    serialize_checkpoint,
)
from ssl_mse.utils import CheckpointError


class TestCheckpoint(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        generator = torch.Generator().manual_seed(0)
        self.tensors = {
            "encoder.weight": torch.randn(4, 1, 8, generator=generator),
            "mask.bias": torch.randn(3, generator=generator),
            "gain": torch.tensor(0.5),
        }
        self.state = {"epoch": 7.0, "lr": 3.75e-4, "best_dev_loss": -12.5}

    def tearDown(self):
        self.tmp.cleanup()

    def test_roundtrip(self):
        path = os.path.join(self.tmp.name, "best.ckpt")
        save_checkpoint(path, self.tensors, self.state)
        tensors, state = load_checkpoint(path)

        self.assertEqual(list(tensors), list(self.tensors))
        for name, tensor in self.tensors.items():
            with self.subTest(name=name):
                self.assertEqual(tensors[name].dtype, torch.float32)
                self.assertTrue(torch.equal(tensors[name], tensor))
        self.assertEqual(dict(state), self.state)

    def test_rewrite_is_byte_identical(self):
        first = os.path.join(self.tmp.name, "a.ckpt")
        second = os.path.join(self.tmp.name, "b.ckpt")
        save_checkpoint(first, self.tensors, self.state)
        save_checkpoint(second, *load_checkpoint(first))
        with open(first, "rb") as f, open(second, "rb") as g:
            self.assertEqual(f.read(), g.read())

    def test_no_temporary_files_left(self):
        path = os.path.join(self.tmp.name, "best.ckpt")
        save_checkpoint(path, self.tensors, self.state)
        save_checkpoint(path, self.tensors, {"epoch": 8.0})
        self.assertEqual(os.listdir(self.tmp.name), ["best.ckpt"])
        self.assertEqual(dict(load_checkpoint(path)[1]), {"epoch": 8.0})

    def test_header(self):
        payload = serialize_checkpoint(self.tensors)
        self.assertEqual(payload[:4], b"SAE1")
        self.assertEqual(struct.unpack("<II", payload[4:12]), (1, len(self.tensors)))

    def test_bad_magic(self):
        payload = bytearray(serialize_checkpoint(self.tensors, self.state))
        payload[:4] = b"SAE2"
        with self.assertRaisesRegex(CheckpointError, "version"):
            deserialize_checkpoint(bytes(payload))

    def test_unsupported_version(self):
        payload = bytearray(serialize_checkpoint(self.tensors, self.state))
        payload[4:8] = struct.pack("<I", 2)
        with self.assertRaisesRegex(CheckpointError, "version 2"):
            deserialize_checkpoint(bytes(payload))

    def test_truncated(self):
        payload = serialize_checkpoint(self.tensors, self.state)
        for cut in (2, 10, len(payload) // 2, len(payload) - 1):
            with self.subTest(cut=cut):
                with self.assertRaises(CheckpointError):
                    deserialize_checkpoint(payload[:cut])

    def test_trailing_bytes(self):
        payload = serialize_checkpoint(self.tensors, self.state)
        with self.assertRaisesRegex(CheckpointError, "trailing"):
            deserialize_checkpoint(payload + b"\x00")

    def test_duplicate_names(self):
        pairs = [("w", torch.zeros(2)), ("w", torch.ones(2))]
        with self.assertRaisesRegex(CheckpointError, "duplicate"):
            serialize_checkpoint(pairs)

    def test_model_state_dict(self):
        model = torch.nn.Sequential(torch.nn.Conv1d(1, 2, 3), torch.nn.GroupNorm(1, 2))
        path = os.path.join(self.tmp.name, "model.ckpt")
        save_checkpoint(path, model.state_dict())
        restored = torch.nn.Sequential(torch.nn.Conv1d(1, 2, 3), torch.nn.GroupNorm(1, 2))
        restored.load_state_dict(load_checkpoint(path)[0])
        for (name, a), (_, b) in zip(model.state_dict().items(), restored.state_dict().items()):
            with self.subTest(name=name):
                self.assertTrue(torch.equal(a, b))


if __name__ == "__main__":
    unittest.main()
