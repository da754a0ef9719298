# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import unittest

import torch
from ssl_mse.loss import LAYER_WEIGHT_SCHEMES, LossConfig, make_layer_weights, ssl_mse
from ssl_mse.training import finite_difference_check, grad_check
from torch import nn


class _Gain(nn.Module):
    def __init__(self, value: float) -> None:
        super().__init__()
        self.gain = nn.Parameter(torch.tensor([value], dtype=torch.float64))


class TestFiniteDifferenceCheck(unittest.TestCase):
    def test_quadratic_in_gain(self):
        generator = torch.Generator().manual_seed(0)
        y = torch.randn(64, generator=generator, dtype=torch.float64)
        x = torch.randn(64, generator=generator, dtype=torch.float64)
        weights = make_layer_weights("all", 2)
        model = _Gain(1.5)

        def loss_fn():
            return ssl_mse((model.gain * y).reshape(2, 4, 8), x.reshape(2, 4, 8), weights)

        result = finite_difference_check(model, loss_fn)
        self.assertEqual(result.num_parameters, 1)
        self.assertLess(result.max_relative_error, 1e-8)
        self.assertEqual(float(model.gain), 1.5)

    def test_parameters_restored(self):
        model = nn.Linear(3, 2).double()
        before = [p.detach().clone() for p in model.parameters()]
        inputs = torch.randn(4, 3, dtype=torch.float64)
        finite_difference_check(model, lambda: model(inputs).pow(2).sum())
        for a, b in zip(before, model.parameters()):
            self.assertTrue(torch.equal(a, b))

    def test_too_many_parameters(self):
        with self.assertRaises(ValueError):
            finite_difference_check(nn.Linear(100, 100), lambda: torch.zeros(()))

    def test_non_finite_gradient(self):
        model = _Gain(0.0)
        with self.assertRaisesRegex(ValueError, "non-finite"):
            finite_difference_check(model, lambda: torch.sqrt(model.gain).sum())


class TestGradCheck(unittest.TestCase):
    def test_multitask_loss(self):
        for scheme in LAYER_WEIGHT_SCHEMES:
            for alpha in (0.0, 0.1, 1.0):
                with self.subTest(scheme=scheme, alpha=alpha):
                    result = grad_check(loss_config=LossConfig(alpha=alpha, scheme=scheme))
                    self.assertLess(result.max_relative_error, 1e-3)
                    self.assertGreater(result.num_parameters, 0)


if __name__ == "__main__":
    unittest.main()
