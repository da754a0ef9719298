# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import os
import tempfile
import unittest

import yaml
from ssl_mse.cli.config import (
    apply_override,
    config_hash,
    config_to_dict,
    ExperimentConfig,
    load_config,
    save_config,
)
from ssl_mse.utils import ConfigError


class TestConfig(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, data):
        path = os.path.join(self.tmp.name, "config.yaml")
        with open(path, "w") as f:
            yaml.safe_dump(data, f)
        return path

    def test_defaults(self):
        config = load_config()
        self.assertEqual(config.loss.alpha, 0.1)
        self.assertEqual(config.loss.scheme, "last")
        self.assertEqual(config.train.lr_pretrain, 5e-4)
        self.assertEqual(config.sweep.alphas, [0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0])
        self.assertIsNone(config.evaluate.mismatch_encoder_seed)

    def test_file_values(self):
        path = self._write({"loss": {"alpha": "1e-4", "scheme": "latter-half"}, "corpus": {"n_train": 3}})
        config = load_config(path)
        self.assertEqual(config.loss.alpha, 1e-4)
        self.assertEqual(config.loss.scheme, "latter_half")
        self.assertEqual(config.corpus.n_train, 3)

    def test_unknown_key(self):
        path = self._write({"loss": {"alhpa": 0.5}})
        with self.assertRaisesRegex(ConfigError, "loss.alhpa"):
            load_config(path)
        with self.assertRaisesRegex(ConfigError, "loss.alhpa"):
            load_config(overrides=["loss.alhpa=0.5"])

    def test_override(self):
        config = load_config(overrides=["loss.alpha=0.01", "sweep.alphas=[0, 0.5]"])
        self.assertEqual(config.loss.alpha, 0.01)
        self.assertEqual(config.sweep.alphas, [0.0, 0.5])

    def test_malformed_override(self):
        with self.assertRaisesRegex(ConfigError, "malformed"):
            apply_override(config_to_dict(ExperimentConfig()), "loss.alpha")

    def test_invalid_value(self):
        with self.assertRaises(ConfigError):
            load_config(overrides=["loss.alpha=-1"])
        with self.assertRaises(ConfigError):
            load_config(overrides=["loss.scheme=first"])

    def test_seed_and_out_dir(self):
        config = load_config(seed=7, out_dir=self.tmp.name)
        self.assertEqual((config.seed, config.train.seed, config.probe.seed), (7, 7, 7))
        self.assertEqual(config.out_dir, self.tmp.name)

    def test_label_hop_must_match_encoder(self):
        with self.assertRaisesRegex(ConfigError, "label_hop"):
            load_config(overrides=["encoder.hop=40"])
        config = load_config(overrides=["encoder.hop=40", "corpus.label_hop=40"])
        self.assertEqual(config.encoder.hop, 40)

    def test_hash(self):
        self.assertEqual(config_hash(load_config()), config_hash(load_config()))
        self.assertNotEqual(
            config_hash(load_config()), config_hash(load_config(overrides=["loss.alpha=0.2"]))
        )

    def test_save_and_reload(self):
        config = load_config(overrides=["loss.alpha=0.01", "corpus.snr_range_eval=[1, 2]"])
        path = os.path.join(self.tmp.name, "saved.yaml")
        save_config(config, path)
        reloaded = load_config(path)
        self.assertEqual(reloaded.corpus.snr_range_eval, (1.0, 2.0))
        self.assertEqual(config_hash(reloaded), config_hash(config))


if __name__ == "__main__":
    unittest.main()
