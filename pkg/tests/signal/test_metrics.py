# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import math
import unittest

import torch
from ssl_mse.signal import power_db, sd_snr, si_sdr, snr_db, Waveform


class TestSDSNR(unittest.TestCase):
    def test_perfect_estimate_is_floored(self):
        reference = torch.randn(1000, dtype=torch.float64)
        self.assertAlmostEqual(float(sd_snr(reference, reference)), 80.0, places=6)

    def test_known_error_power(self):
        reference = torch.tensor([10.0, 0.0], dtype=torch.float64)
        estimate = torch.tensor([10.0, 1.0], dtype=torch.float64)
        self.assertAlmostEqual(float(sd_snr(estimate, reference)), 20.0, places=4)

    def test_zero_estimate(self):
        reference = torch.randn(500, dtype=torch.float64)
        self.assertAlmostEqual(float(sd_snr(torch.zeros_like(reference), reference)), 0.0, places=6)

    def test_decreases_with_noise_power(self):
        generator = torch.Generator().manual_seed(0)
        reference = torch.randn(2000, generator=generator, dtype=torch.float64)
        noise = torch.randn(2000, generator=generator, dtype=torch.float64)
        values = [float(sd_snr(reference + scale * noise, reference)) for scale in (0.01, 0.1, 0.5, 1.0)]
        for previous, current in zip(values, values[1:]):
            self.assertGreater(previous, current)

    def test_batched(self):
        reference = torch.randn(3, 400, dtype=torch.float64)
        estimate = reference + 0.1 * torch.randn(3, 400, dtype=torch.float64)
        batched = sd_snr(estimate, reference)
        self.assertEqual(batched.shape, (3,))
        for i in range(3):
            self.assertAlmostEqual(float(batched[i]), float(sd_snr(estimate[i], reference[i])), places=9)

    def test_waveform_inputs(self):
        reference = Waveform(torch.randn(100, dtype=torch.float64))
        self.assertAlmostEqual(float(sd_snr(reference, reference)), 80.0, places=6)

    def test_errors(self):
        with self.assertRaisesRegex(ValueError, "Length mismatch"):
            sd_snr(torch.randn(10), torch.randn(11))
        with self.assertRaisesRegex(ValueError, "zero power"):
            sd_snr(torch.randn(10), torch.zeros(10))


class TestSISDR(unittest.TestCase):
    def test_orthogonal_residual(self):
        reference = torch.tensor([2.0, 0.0, 0.0], dtype=torch.float64)
        noise = torch.tensor([0.0, 1.0, 0.0], dtype=torch.float64)
        self.assertAlmostEqual(
            float(si_sdr(reference + noise, reference)), 10 * math.log10(4.0), places=4
        )

    def test_scale_invariance(self):
        generator = torch.Generator().manual_seed(1)
        for pair in range(20):
            reference = torch.randn(800, generator=generator, dtype=torch.float64)
            estimate = reference + 0.3 * torch.randn(800, generator=generator, dtype=torch.float64)
            base = float(si_sdr(estimate, reference))
            for scale in (0.1, 2.0, 3.7):
                with self.subTest(pair=pair, scale=scale):
                    self.assertLess(abs(float(si_sdr(scale * estimate, reference)) - base), 1e-6)

    def test_perfect_estimate_is_floored(self):
        reference = torch.randn(256, dtype=torch.float64)
        self.assertAlmostEqual(float(si_sdr(reference, reference)), 80.0, places=6)

    def test_errors(self):
        with self.assertRaisesRegex(ValueError, "Length mismatch"):
            si_sdr(torch.randn(3, 10), torch.randn(3, 12))
        with self.assertRaisesRegex(ValueError, "zero power"):
            si_sdr(torch.randn(10), torch.zeros(10))


class TestPowerHelpers(unittest.TestCase):
    def test_snr_db(self):
        signal = torch.ones(100, dtype=torch.float64)
        noise = 0.1 * torch.ones(100, dtype=torch.float64)
        self.assertAlmostEqual(float(snr_db(signal, noise)), 20.0, places=9)

    def test_power_db(self):
        x = 0.5 * torch.ones(10, dtype=torch.float64)
        self.assertAlmostEqual(float(power_db(x)), 10 * math.log10(0.25), places=9)


if __name__ == "__main__":
    unittest.main()
