# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import math
import unittest
import warnings

import torch
from ssl_mse.encoder import EncoderConfig, init_frozen_encoder
from ssl_mse.loss import (
    loss_gradients,
    LossConfig,
    multitask_loss,
    MultitaskLoss,
    snr_training_loss,
    SNRLoss,
)
from ssl_mse.model import init_se_model, SEConfig
from ssl_mse.utils import NonFiniteLossError


class TestSNRTrainingLoss(unittest.TestCase):
    def test_perfect_reconstruction(self):
        x = torch.randn(300, dtype=torch.float64)
        self.assertAlmostEqual(float(snr_training_loss(x, x)), -80.0, places=6)

    def test_known_error(self):
        x = torch.tensor([10.0, 0.0], dtype=torch.float64)
        x_hat = torch.tensor([10.0, 1.0], dtype=torch.float64)
        self.assertAlmostEqual(float(snr_training_loss(x_hat, x)), -20.0, places=4)

    def test_zero_estimate(self):
        x = torch.randn(300, dtype=torch.float64)
        self.assertAlmostEqual(float(snr_training_loss(torch.zeros_like(x), x)), 0.0, places=6)

    def test_module(self):
        x = torch.randn(3, 100, dtype=torch.float64)
        x_hat = x + 0.1 * torch.randn(3, 100, dtype=torch.float64)
        self.assertAlmostEqual(
            float(SNRLoss()(x_hat, x)), float(snr_training_loss(x_hat, x).mean()), places=12
        )
        self.assertEqual(SNRLoss(reduction="none")(x_hat, x).shape, (3,))
        with self.assertRaises(ValueError):
            SNRLoss()(x_hat, x[:, :50])


class TestMultitaskLoss(unittest.TestCase):
    def test_alpha_zero(self):
        ssl = torch.tensor(0.3, dtype=torch.float64)
        breakdown = multitask_loss(ssl, torch.tensor(-12.0, dtype=torch.float64), 0.0)
        self.assertEqual(float(breakdown.total), 0.3)

    def test_arithmetic(self):
        breakdown = multitask_loss(
            torch.tensor(0.5, dtype=torch.float64), torch.tensor(-10.0, dtype=torch.float64), 0.1
        )
        self.assertLess(abs(float(breakdown.total) + 0.5), 1e-9)
        self.assertEqual(breakdown.as_floats()["snr_term"], -10.0)

    def test_linear_in_alpha(self):
        ssl, snr = torch.tensor(0.25, dtype=torch.float64), torch.tensor(-7.5, dtype=torch.float64)
        difference = multitask_loss(ssl, snr, 0.75).total - multitask_loss(ssl, snr, 0.25).total
        self.assertAlmostEqual(float(difference), 0.5 * float(snr), places=12)

    def test_derivative_in_alpha(self):
        alpha = torch.tensor(0.1, dtype=torch.float64, requires_grad=True)
        snr = torch.tensor(-13.25, dtype=torch.float64)
        multitask_loss(torch.tensor(0.4, dtype=torch.float64), snr, alpha).total.backward()
        self.assertEqual(float(alpha.grad), float(snr))

    def test_negative_alpha(self):
        with self.assertRaises(ValueError):
            multitask_loss(0.1, 0.1, -0.1)
        with self.assertRaises(ValueError):
            LossConfig(alpha=-1.0)

    def test_config_defaults(self):
        config = LossConfig()
        self.assertEqual(config.alpha, 0.1)
        self.assertEqual(config.scheme, "last")
        self.assertEqual(LossConfig(scheme="latter-half").scheme, "latter_half")


class TestLossGradients(unittest.TestCase):
    def setUp(self):
        self.encoder = init_frozen_encoder(
            EncoderConfig(n_layers=2, dim=8, hop=16, frontend_kernel=32, seed=0)
        )
        self.model = init_se_model(
            SEConfig(basis=8, window=8, bottleneck=4, repeats=1, blocks=2, hidden=8), seed=0
        )
        generator = torch.Generator().manual_seed(0)
        self.clean = 0.5 * torch.randn(3, 256, generator=generator)
        self.noisy = self.clean + 0.3 * torch.randn(3, 256, generator=generator)

    def test_breakdown_invariant(self):
        config = LossConfig(alpha=0.1, scheme="all")
        breakdown = MultitaskLoss(self.encoder, config)(self.model(self.noisy), self.clean)
        expected = breakdown.ssl_mse + 0.1 * breakdown.snr_term
        self.assertTrue(torch.allclose(breakdown.total, expected, rtol=0, atol=1e-6))
        self.assertGreaterEqual(float(breakdown.ssl_mse), 0.0)

    def test_as_floats_without_warnings(self):
        breakdown = MultitaskLoss(self.encoder, LossConfig())(self.model(self.noisy), self.clean)
        self.assertTrue(breakdown.total.requires_grad)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            values = breakdown.as_floats()
        self.assertEqual(caught, [])
        self.assertEqual(set(values), {"ssl_mse", "snr_term", "total"})
        self.assertTrue(all(isinstance(value, float) for value in values.values()))

    def test_gradients_finite_and_encoder_untouched(self):
        grads = loss_gradients(self.model, (self.noisy, self.clean), self.encoder, LossConfig())
        self.assertEqual(set(grads), {name for name, _ in self.model.named_parameters()})
        for name, grad in grads.items():
            with self.subTest(name=name):
                self.assertIsNotNone(grad)
                self.assertTrue(torch.isfinite(grad).all())
        for param in self.encoder.parameters():
            self.assertIsNone(param.grad)

    def test_non_finite_loss(self):
        noisy = self.noisy.clone()
        noisy[0, 10] = math.nan
        with self.assertRaises(NonFiniteLossError) as context:
            loss_gradients(self.model, (noisy, self.clean), self.encoder, LossConfig(), batch_id=4)
        self.assertEqual(context.exception.batch, 4)


if __name__ == "__main__":
    unittest.main()
