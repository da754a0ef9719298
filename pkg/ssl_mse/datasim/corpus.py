# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import csv
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import torch
from loguru import logger
from torch import Tensor
from torch.utils.data import Dataset

from ssl_mse.datasim.noise import gen_noise
from ssl_mse.datasim.sources import gen_source
from ssl_mse.signal import mix_at_snr, read_wav, Waveform, write_wav
from ssl_mse.utils import progress

SPLITS = ("train", "dev", "eval")
MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ("id", "split", "snr_db", "path_mixture", "path_source", "path_labels")
MIXTURE_PEAK = 0.99


@dataclass
class CorpusConfig:
    r"""Synthetic corpus description.

    The dev split uses the training SNR range; the eval split uses ``snr_range_eval``.
    """

    n_train: int = field(default=768, metadata={"help": "number of training items."})
    n_dev: int = field(default=32, metadata={"help": "number of development items."})
    n_eval: int = field(default=32, metadata={"help": "number of evaluation items."})
    duration_s: float = field(default=1.0, metadata={"help": "item duration in seconds."})
    sample_rate: int = field(default=8000, metadata={"help": "sampling rate in Hz."})
    token_count: int = field(default=8, metadata={"help": "number of source tokens C."})
    label_hop: int = field(
        default=80, metadata={"help": "frame hop of the labels, equal to the encoder hop."}
    )
    snr_range_train: Tuple[float, float] = field(
        default=(-3.0, 20.0), metadata={"help": "SNR range of train/dev mixtures in dB."}
    )
    snr_range_eval: Tuple[float, float] = field(
        default=(0.0, 10.0), metadata={"help": "SNR range of eval mixtures in dB."}
    )
    master_seed: int = field(default=0, metadata={"help": "seed of the whole corpus."})
    num_workers: int = field(
        default=0, metadata={"help": "generation processes, 0 generates in-process."}
    )

    def __post_init__(self) -> None:
        self.snr_range_train = tuple(float(v) for v in self.snr_range_train)
        self.snr_range_eval = tuple(float(v) for v in self.snr_range_eval)
        for name in ("n_train", "n_dev", "n_eval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1. Got {getattr(self, name)}.")
        for name in ("snr_range_train", "snr_range_eval"):
            snr_range = getattr(self, name)
            if (
                len(snr_range) != 2
                or not all(math.isfinite(v) for v in snr_range)
                or snr_range[0] > snr_range[1]
            ):
                raise ValueError(f"{name} must be a finite (low, high) pair. Got {snr_range}.")
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer. Got {self.master_seed}.")

    def count(self, split: str) -> int:
        return {"train": self.n_train, "dev": self.n_dev, "eval": self.n_eval}[split]

    def snr_range(self, split: str) -> Tuple[float, float]:
        return self.snr_range_eval if split == "eval" else self.snr_range_train


@dataclass
class CorpusItem:
    """One manifest row; paths are relative to the manifest directory."""

    id: str
    split: str
    snr_db: float
    path_mixture: str
    path_source: str
    path_labels: str


def item_seeds(master_seed: int, split: str, index: int) -> Tuple[int, int, int]:
    r"""Seeds of the source, the noise and the SNR draw of one item.

    They are derived from ``(master_seed, split, index)`` through :class:`numpy.random.SeedSequence`
    spawn keys, so every item can be generated independently of the others.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(SPLITS.index(split), index))
    source_seed, noise_seed, snr_seed = sequence.generate_state(3, dtype=np.uint64)
    return int(source_seed), int(noise_seed), int(snr_seed)


def write_labels(path: Union[str, os.PathLike], labels: Tensor) -> None:
    """Write labels as little-endian unsigned 16-bit ids."""
    np.asarray(labels.cpu().numpy(), dtype="<u2").tofile(path)


def read_labels(path: Union[str, os.PathLike]) -> Tensor:
    return torch.from_numpy(np.fromfile(path, dtype="<u2").astype(np.int64))


def _generate_item(args: Tuple[CorpusConfig, str, int, str]) -> Dict[str, str]:
    config, split, index, out_dir = args
    source_seed, noise_seed, snr_seed = item_seeds(config.master_seed, split, index)

    source = gen_source(
        source_seed,
        config.duration_s,
        token_count=config.token_count,
        sample_rate=config.sample_rate,
        hop=config.label_hop,
    )
    noise = gen_noise(noise_seed, config.duration_s, sample_rate=config.sample_rate)
    snr = float(np.random.default_rng(snr_seed).uniform(*config.snr_range(split)))

    mixture, _ = mix_at_snr(source.waveform, noise, snr)
    clean = source.waveform.samples
    peak = float(mixture.samples.abs().max())
    if peak > MIXTURE_PEAK:
        # same factor on both signals keeps the SNR
        scale = MIXTURE_PEAK / peak
        mixture = Waveform(mixture.samples * scale, mixture.sample_rate)
        clean = clean * scale

    item_id = f"{split}_{index:05d}"
    row = {
        "id": item_id,
        "split": split,
        "snr_db": f"{snr:.10g}",
        "path_mixture": f"{split}/{item_id}_mixture.wav",
        "path_source": f"{split}/{item_id}_source.wav",
        "path_labels": f"{split}/{item_id}_labels.u16",
    }
    write_wav(os.path.join(out_dir, row["path_mixture"]), mixture)
    write_wav(os.path.join(out_dir, row["path_source"]), Waveform(clean, config.sample_rate))
    write_labels(os.path.join(out_dir, row["path_labels"]), source.labels)

    return row


def build_corpus(
    config: CorpusConfig, out_dir: Union[str, os.PathLike], verbose: bool = False
) -> Path:
    r"""Generate and persist the train/dev/eval mixtures.

    Every item stores the mixture and the source as 16-bit WAV files and the frame labels as a
    binary file; ``manifest.csv`` lists all items and is written after every item is complete.
    Regenerating with the same config gives byte-identical files.

    Args:
        config (CorpusConfig): corpus description.
        out_dir (Union[str, os.PathLike]): destination directory, created if needed.
        verbose (bool): show a progress bar. Defaults to False.

    Returns:
        Path: path of the manifest.
    """
    out_dir = Path(out_dir)
    for split in SPLITS:
        (out_dir / split).mkdir(parents=True, exist_ok=True)

    jobs = [
        (config, split, index, str(out_dir))
        for split in SPLITS
        for index in range(config.count(split))
    ]
    logger.info(f"Generating {len(jobs)} corpus items in {out_dir}")

    if config.num_workers > 1:
        logger.info(f"Simulate using {config.num_workers} workers")
        with multiprocessing.Pool(config.num_workers) as pool:
            rows = list(
                progress(
                    pool.imap(_generate_item, jobs),
                    verbose=verbose,
                    desc="simulate",
                    total=len(jobs),
                )
            )
    else:
        rows = [
            _generate_item(job)
            for job in progress(jobs, verbose=verbose, desc="simulate")
        ]

    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Wrote manifest {manifest_path}")

    return manifest_path


def read_manifest(
    manifest_path: Union[str, os.PathLike], split: Optional[str] = None
) -> List[CorpusItem]:
    """Manifest rows, optionally restricted to one split."""
    with open(manifest_path, newline="") as f:
        items = [
            CorpusItem(
                id=row["id"],
                split=row["split"],
                snr_db=float(row["snr_db"]),
                path_mixture=row["path_mixture"],
                path_source=row["path_source"],
                path_labels=row["path_labels"],
            )
            for row in csv.DictReader(f)
        ]
    if split is not None:
        if split not in SPLITS:
            raise ValueError(f"{split} is not a valid split, expected one of {SPLITS}.")
        items = [item for item in items if item.split == split]
    return items


class MixtureDataset(Dataset):
    r"""One split of a persisted corpus, held in memory.

    Items are ``(mixture, source, labels)`` with float32 waveforms of shape (time,) and int64
    labels of shape (frames,).

    Args:
        manifest_path (Union[str, os.PathLike]): corpus manifest.
        split (str): one of ``'train'``, ``'dev'``, ``'eval'``.
    """

    def __init__(self, manifest_path: Union[str, os.PathLike], split: str) -> None:
        self.root = Path(manifest_path).parent
        self.split = split
        self.items = read_manifest(manifest_path, split)
        if not self.items:
            raise ValueError(f"split '{split}' of {manifest_path} is empty.")

        self.mixtures: List[Tensor] = []
        self.sources: List[Tensor] = []
        self.labels: List[Tensor] = []
        self.sample_rate: Optional[int] = None
        for item in self.items:
            mixture = read_wav(self.root / item.path_mixture)
            source = read_wav(self.root / item.path_source)
            self.sample_rate = mixture.sample_rate
            self.mixtures.append(mixture.samples)
            self.sources.append(source.samples)
            self.labels.append(read_labels(self.root / item.path_labels))

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, index: int) -> Tuple[Tensor, Tensor, Tensor]:
        return self.mixtures[index], self.sources[index], self.labels[index]
