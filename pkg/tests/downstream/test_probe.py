# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.
import unittest

import torch
from ssl_mse.datasim import gen_noise, gen_source
from ssl_mse.downstream import (
    DownstreamProbe,
    eval_probe,
    extract_features,
    frame_accuracy,
    ProbeConfig,
    train_probe,
)
from ssl_mse.encoder import EncoderConfig, init_frozen_encoder
from ssl_mse.model import init_se_model, SEConfig
from ssl_mse.signal import mix_at_snr, Waveform
from ssl_mse.utils import parameters_checksum

N_CLASSES = 8


def _items(seeds, duration_s=0.5, noise_seed_offset=1000, snr_db=5.0):
    items = []
    for seed in seeds:
        source = gen_source(seed, duration_s, token_count=N_CLASSES)
        noise = gen_noise(seed + noise_seed_offset, duration_s)
        mixture, _ = mix_at_snr(source.waveform, noise, snr_db)
        items.append(
            (
                mixture.samples.to(torch.float32),
                source.waveform.samples.to(torch.float32),
                source.labels.to(torch.long),
            )
        )
    return items


class TestProbe(unittest.TestCase):
    def setUp(self):
        self.encoder = init_frozen_encoder(
            EncoderConfig(n_layers=3, dim=16, hop=80, frontend_kernel=160, seed=0)
        )
        self.train_set = _items(range(6))
        self.dev_set = _items(range(10, 13))
        self.config = ProbeConfig(epochs=5, lr=1e-2, batch_size=2, seed=3)

    def test_extract_features_shapes(self):
        layers, labels = extract_features(self.dev_set, self.encoder, batch_size=2)
        # 4000 samples, hop 80, kernel 160
        self.assertEqual(layers.shape, (3, 3, 16, 49))
        self.assertEqual(labels.shape, (3, 49))

    def test_logits_shape(self):
        probe = DownstreamProbe(3, 16, N_CLASSES)
        layers, _ = extract_features(self.dev_set, self.encoder)
        self.assertEqual(probe(layers).shape, (3, 49, N_CLASSES))

    def test_zero_classifier_predicts_first_class(self):
        probe = DownstreamProbe(3, 16, N_CLASSES)
        with torch.no_grad():
            probe.classifier.weight.zero_()
            probe.classifier.bias.zero_()
        layers, labels = extract_features(self.dev_set, self.encoder)
        expected = float((labels == 0).to(torch.float64).mean())
        self.assertEqual(frame_accuracy(probe, layers, labels), expected)

    def test_train_probe_deterministic(self):
        first = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=self.config)
        second = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=self.config)
        self.assertEqual(first.train_losses, second.train_losses)
        self.assertEqual(first.dev_accuracy, second.dev_accuracy)
        self.assertGreaterEqual(first.dev_accuracy, 0.0)
        self.assertLessEqual(first.dev_accuracy, 1.0)

    def test_train_probe_learns(self):
        config = ProbeConfig(epochs=30, lr=1e-2, batch_size=2, seed=0)
        result = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=config)
        self.assertEqual(len(result.train_losses), 30)
        self.assertLess(result.train_losses[-1], result.train_losses[0])

    def test_untrained_probe_at_chance(self):
        clean = [(s, s, l) for _, s, l in _items(range(100, 124))]
        layers, labels = extract_features(clean, self.encoder, batch_size=8)
        accuracies = []
        for seed in range(32):
            torch.manual_seed(seed)
            accuracies.append(frame_accuracy(DownstreamProbe(3, 16, N_CLASSES), layers, labels))
        self.assertAlmostEqual(sum(accuracies) / len(accuracies), 1 / N_CLASSES, delta=0.05)

    def test_noisy_input_degrades_accuracy(self):
        config = ProbeConfig(epochs=30, lr=1e-2, batch_size=2, seed=0)
        result = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=config)
        eval_set = _items(range(200, 206), snr_db=0.0)
        clean = eval_probe(eval_set, self.encoder, result.probe, use_mixture=False)
        noisy = eval_probe(eval_set, self.encoder, result.probe, use_mixture=True)
        self.assertGreaterEqual(clean, noisy)

    def test_frozen_modules_unchanged(self):
        frontend = init_se_model(
            SEConfig(basis=8, window=8, bottleneck=4, repeats=1, blocks=2, hidden=8), seed=0
        )
        before = (parameters_checksum(self.encoder), parameters_checksum(frontend))
        train_probe(
            self.train_set, self.dev_set, self.encoder, N_CLASSES, frontend=frontend, config=self.config
        )
        self.assertEqual(before, (parameters_checksum(self.encoder), parameters_checksum(frontend)))

    def test_official_mode_ignores_mixtures(self):
        swapped = [(torch.zeros_like(m), s, l) for m, s, l in self.train_set]
        swapped_dev = [(torch.zeros_like(m), s, l) for m, s, l in self.dev_set]
        first = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=self.config)
        second = train_probe(swapped, swapped_dev, self.encoder, N_CLASSES, config=self.config)
        self.assertEqual(first.train_losses, second.train_losses)

    def test_noise_robust_mode_uses_mixtures(self):
        config = ProbeConfig(epochs=5, lr=1e-2, batch_size=2, seed=3, train_mode="noise_robust")
        official = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=self.config)
        robust = train_probe(self.train_set, self.dev_set, self.encoder, N_CLASSES, config=config)
        self.assertNotEqual(official.train_losses, robust.train_losses)

    def test_frontend_matches_pre_enhanced_input(self):
        frontend = init_se_model(
            SEConfig(basis=8, window=8, bottleneck=4, repeats=1, blocks=2, hidden=8), seed=1
        )
        probe = DownstreamProbe(3, 16, N_CLASSES)
        with torch.no_grad():
            enhanced = frontend(torch.stack([item[0] for item in self.dev_set]))
        pre_enhanced = [(e, s, l) for e, (_, s, l) in zip(enhanced, self.dev_set)]
        batch = len(self.dev_set)
        self.assertEqual(
            eval_probe(self.dev_set, self.encoder, probe, frontend=frontend, batch_size=batch),
            eval_probe(pre_enhanced, self.encoder, probe, batch_size=batch),
        )

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            eval_probe(self.dev_set, self.encoder, DownstreamProbe(3, 8, N_CLASSES))
        with self.assertRaises(ValueError):
            eval_probe(self.dev_set, self.encoder, DownstreamProbe(4, 16, N_CLASSES))

    def test_empty_corpus(self):
        with self.assertRaisesRegex(ValueError, "empty corpus"):
            train_probe([], self.dev_set, self.encoder, N_CLASSES, config=self.config)

    def test_label_misalignment(self):
        short = [(m, s, l[:10]) for m, s, l in self.train_set]
        with self.assertRaisesRegex(ValueError, "misalignment"):
            train_probe(short, self.dev_set, self.encoder, N_CLASSES, config=self.config)

    def test_invalid_train_mode(self):
        with self.assertRaises(ValueError):
            ProbeConfig(train_mode="noisy")


if __name__ == "__main__":
    unittest.main()
