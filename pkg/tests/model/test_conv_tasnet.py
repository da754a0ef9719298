# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import math
import unittest

import numpy as np
import torch
from scipy.fft import dct
from ssl_mse.model import ConvTasNet, enhance, init_se_model, SEConfig
from ssl_mse.signal import sd_snr, Waveform
from ssl_mse.utils import num_parameters, parameters_checksum


def _orthonormal_basis(window: int) -> torch.Tensor:
    n = np.arange(window)
    sqrt_hann = np.sqrt(0.5 - 0.5 * np.cos(2 * np.pi * n / window))
    dct_matrix = dct(np.eye(window), norm="ortho", axis=0)
    return torch.from_numpy(dct_matrix * sqrt_hann[None, :])


class TestConvTasNet(unittest.TestCase):
    def setUp(self):
        self.config = SEConfig(basis=16, window=8, bottleneck=8, repeats=1, blocks=2, hidden=16)
        self.model = init_se_model(self.config, seed=0)

    def test_length_preserved(self):
        window = self.config.window
        for length in (window, window + 1, 10 * window + 7):
            with self.subTest(length=length):
                self.assertEqual(self.model(torch.randn(length)).shape, (length,))
                self.assertEqual(self.model(torch.randn(3, length)).shape, (3, length))

    def test_zero_input(self):
        out = self.model(torch.zeros(2, 100))
        self.assertTrue(torch.equal(out, torch.zeros(2, 100)))

    def test_mask_range(self):
        w = self.model.encode(torch.randn(2, 64))
        mask = self.model.estimate_mask(w)
        self.assertEqual(mask.shape, w.shape)
        self.assertTrue(((mask >= 0) & (mask <= 1)).all())

    def test_orthonormal_overlap_add(self):
        window = 16
        config = SEConfig(basis=window, window=window, encoder_activation="linear")
        model = ConvTasNet(config).double()
        basis = _orthonormal_basis(window)
        with torch.no_grad():
            model.encoder.weight.copy_(basis.unsqueeze(1))
            model.decoder.weight.copy_(basis.unsqueeze(1))
        x = torch.randn(2, 1000, dtype=torch.float64)
        reconstruction = model.decode(model.encode(x), x.shape[-1])
        relative = float((reconstruction - x).norm() / x.norm())
        self.assertLessEqual(relative, 1e-5)

    def test_deterministic_init(self):
        other = init_se_model(self.config, seed=0)
        self.assertEqual(parameters_checksum(self.model), parameters_checksum(other))
        self.assertNotEqual(
            parameters_checksum(self.model), parameters_checksum(init_se_model(self.config, seed=1))
        )

    def test_init_leaves_global_rng(self):
        torch.manual_seed(123)
        expected = torch.rand(3)
        torch.manual_seed(123)
        init_se_model(self.config, seed=9)
        self.assertTrue(torch.equal(torch.rand(3), expected))

    def test_every_parameter_gets_gradient(self):
        clean = torch.randn(2, 200)
        noisy = clean + 0.5 * torch.randn(2, 200)
        loss = -sd_snr(self.model(noisy), clean).mean()
        loss.backward()
        for name, param in self.model.named_parameters():
            with self.subTest(name=name):
                self.assertIsNotNone(param.grad)
                self.assertTrue(torch.isfinite(param.grad).all())

    def test_too_short(self):
        with self.assertRaisesRegex(ValueError, "shorter than one window"):
            self.model(torch.randn(self.config.window - 1))

    def test_enhance_waveform(self):
        noisy = Waveform(torch.randn(400), sample_rate=16000)
        out = enhance(self.model, noisy)
        self.assertIsInstance(out, Waveform)
        self.assertEqual(out.sample_rate, 16000)
        self.assertEqual(out.num_samples, 400)
        self.assertFalse(out.samples.requires_grad)
        self.assertTrue(torch.equal(out.samples, enhance(self.model, noisy.samples)))


class TestSEConfig(unittest.TestCase):
    def test_desk_scale_defaults(self):
        config = SEConfig()
        self.assertEqual(
            (config.basis, config.window, config.bottleneck, config.repeats, config.blocks, config.hidden, config.kernel),
            (128, 32, 32, 2, 4, 64, 3),
        )
        self.assertEqual(config.stride, 16)

    def test_full_scale(self):
        config = SEConfig.full_scale()
        self.assertEqual(
            (config.basis, config.window, config.bottleneck, config.repeats, config.blocks, config.hidden, config.kernel),
            (4096, 320, 256, 4, 8, 512, 3),
        )

    def test_validation(self):
        with self.assertRaises(ValueError):
            SEConfig(window=31)
        with self.assertRaises(ValueError):
            SEConfig(basis=0)
        with self.assertRaises(ValueError):
            SEConfig(encoder_activation="tanh")

    def test_parameter_count(self):
        model = ConvTasNet(SEConfig(basis=4, window=4, bottleneck=2, repeats=1, blocks=1, hidden=2, kernel=3))
        # encoder 16, gLN 8, 4->2 conv 10, block (6 + 1 + 4 + 8 + 1 + 4 + 6), PReLU 1, 2->4 conv 12, decoder 16
        self.assertEqual(num_parameters(model), 16 + 8 + 10 + 30 + 1 + 12 + 16)
        self.assertTrue(math.isfinite(float(sum(p.sum() for p in model.parameters()))))


if __name__ == "__main__":
    unittest.main()
