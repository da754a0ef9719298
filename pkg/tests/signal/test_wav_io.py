# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import os
import tempfile
import unittest

import numpy as np
import soundfile as sf
import torch
from ssl_mse.signal import read_wav, to_pcm16, Waveform, write_wav


class TestWavIO(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_ramp_roundtrip(self):
        ramp = torch.linspace(-1.0, 32767 / 32768, 8000)
        path = os.path.join(self.dir, "ramp.wav")
        write_wav(path, Waveform(ramp, 8000))
        restored = read_wav(path)
        self.assertEqual(restored.sample_rate, 8000)
        self.assertEqual(restored.num_samples, 8000)
        np.testing.assert_array_equal(to_pcm16(restored), to_pcm16(Waveform(ramp)))

        second = os.path.join(self.dir, "again.wav")
        write_wav(second, restored)
        with open(path, "rb") as a, open(second, "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_full_scale_word(self):
        path = os.path.join(self.dir, "max.wav")
        sf.write(path, np.array([32767, -32768, 0], dtype=np.int16), 8000, subtype="PCM_16")
        samples = read_wav(path).samples
        self.assertEqual(float(samples[0]), 32767 / 32768)
        self.assertEqual(float(samples[1]), -1.0)
        self.assertEqual(samples.dtype, torch.float32)

    def test_stereo_rejected(self):
        path = os.path.join(self.dir, "stereo.wav")
        sf.write(path, np.zeros((100, 2), dtype=np.int16), 8000, subtype="PCM_16")
        with self.assertRaisesRegex(ValueError, "unsupported channels"):
            read_wav(path)

    def test_bit_depth_rejected(self):
        path = os.path.join(self.dir, "deep.wav")
        sf.write(path, np.zeros(100, dtype=np.float32), 8000, subtype="PCM_24")
        with self.assertRaisesRegex(ValueError, "unsupported bit depth"):
            read_wav(path)

    def test_malformed_header(self):
        path = os.path.join(self.dir, "broken.wav")
        with open(path, "wb") as f:
            f.write(b"RIFX not a wave file at all")
        with self.assertRaisesRegex(ValueError, "malformed WAV header"):
            read_wav(path)

    def test_missing_paths(self):
        with self.assertRaises(FileNotFoundError):
            read_wav(os.path.join(self.dir, "absent.wav"))
        with self.assertRaises(FileNotFoundError):
            write_wav(os.path.join(self.dir, "no", "such.wav"), Waveform(torch.zeros(10)))

    def test_clipping(self):
        words = to_pcm16(Waveform(torch.tensor([1.5, -1.5, 0.5])))
        np.testing.assert_array_equal(words, np.array([32767, -32768, 16384], dtype=np.int16))


if __name__ == "__main__":
    unittest.main()
