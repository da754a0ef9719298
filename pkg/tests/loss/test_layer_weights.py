# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import unittest

import torch
from ssl_mse.loss import LAYER_WEIGHT_SCHEMES, make_layer_weights, normalize_scheme


class TestLayerWeights(unittest.TestCase):
    def test_last(self):
        self.assertEqual(make_layer_weights("last", 4).tolist(), [0.0, 0.0, 0.0, 1.0])

    def test_all(self):
        self.assertEqual(make_layer_weights("all", 4).tolist(), [0.25, 0.25, 0.25, 0.25])

    def test_latter_half(self):
        weights = make_layer_weights("latter_half", 12)
        self.assertTrue(torch.equal(weights[:6], torch.zeros(6, dtype=torch.float64)))
        self.assertTrue(torch.allclose(weights[6:], torch.full((6,), 1 / 6, dtype=torch.float64)))

    def test_latter_half_odd(self):
        self.assertTrue(
            torch.allclose(make_layer_weights("latter_half", 5), torch.tensor([0, 0, 1 / 3, 1 / 3, 1 / 3], dtype=torch.float64))
        )
        self.assertEqual(make_layer_weights("latter_half", 1).tolist(), [1.0])

    def test_sum_to_one(self):
        for scheme in LAYER_WEIGHT_SCHEMES:
            for n_layers in range(1, 17):
                with self.subTest(scheme=scheme, n_layers=n_layers):
                    weights = make_layer_weights(scheme, n_layers)
                    self.assertEqual(weights.shape, (n_layers,))
                    self.assertTrue((weights >= 0).all())
                    self.assertLess(abs(float(weights.sum()) - 1.0), 1e-9)

    def test_scheme_names(self):
        self.assertEqual(normalize_scheme("latter-half"), "latter_half")
        with self.assertRaises(ValueError):
            make_layer_weights("first", 4)
        with self.assertRaises(ValueError):
            make_layer_weights("all", 0)


if __name__ == "__main__":
    unittest.main()
