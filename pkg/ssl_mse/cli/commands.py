# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import hashlib
import json
import math
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import torch
from loguru import logger
from torch import nn

from ssl_mse.cli.config import ExperimentConfig
from ssl_mse.datasim import build_corpus, MixtureDataset, SPLITS
from ssl_mse.downstream import DownstreamProbe, eval_probe, train_probe, TRAIN_MODES
from ssl_mse.encoder import FrozenEncoder, init_frozen_encoder
from ssl_mse.loss import LAYER_WEIGHT_SCHEMES, LossConfig, ssl_mse_distance
from ssl_mse.model import ConvTasNet, enhance, init_se_model
from ssl_mse.signal import read_wav, si_sdr, write_wav
from ssl_mse.training import (
    evaluate_se,
    finetune_sslmse,
    grad_check,
    load_checkpoint,
    load_se_state,
    pretrain_se,
    save_checkpoint,
    SNRObjective,
)
from ssl_mse.utils import (
    CheckpointError,
    ConfigError,
    ModelWrapper,
    parameters_checksum,
    read_csv,
    write_csv,
)

GRADCHECK_TOLERANCE = 1e-3
GRADCHECK_ALPHAS = (0.0, 0.1, 1.0)

METRICS_COLUMNS = ("frontend_tag", "split", "si_sdr", "ssl_mse_last", "source")
PROBE_COLUMNS = ("frontend_tag", "encoder", "train_mode", "split", "input", "accuracy", "source")
TRADEOFF_COLUMNS = ("alpha", "dev_si_sdr", "dev_ssl_mse_last", "probe_acc_noisy", "probe_acc_clean")
PLOT_COLUMNS = ("series", "alpha", "x", "value")
GRADCHECK_COLUMNS = ("scheme", "alpha", "max_relative_error", "num_parameters", "passed")
REPORT_COLUMNS = (
    "frontend",
    "split",
    "si_sdr",
    "ssl_mse_last",
    "probe_acc_noisy",
    "probe_acc_clean",
    "source",
)

NO_SE_TAG = "no_se"
SNR_SE_TAG = "snr_se"


class RunPaths:
    """Artifact layout below the output directory."""

    def __init__(self, out_dir: Path) -> None:
        self.root = Path(out_dir)
        self.corpus = self.root / "corpus"
        self.manifest = self.corpus / "manifest.csv"
        self.pretrain = self.root / "pretrain"
        self.finetune = self.root / "finetune"
        self.probe = self.root / "probe"
        self.evaluate = self.root / "evaluate"
        self.sweep = self.root / "sweep"
        self.gradcheck = self.root / "gradcheck"

    def checkpoint(self, stage_dir: Path) -> Path:
        return stage_dir / "best.ckpt"

    def probe_checkpoint(self, encoder_tag: str, train_mode: str, key: str) -> Path:
        return self.probe / f"{encoder_tag}_{train_mode}_{key}.ckpt"

    def relative(self, path: Path) -> str:
        return path.relative_to(self.root).as_posix()


def require(path: Path, subcommand: str) -> Path:
    if not path.exists():
        raise ConfigError(
            f"missing prerequisite artifact {path}: run `{subcommand}` first."
        )
    return path


def ssl_mse_tag(alpha: float, scheme: str) -> str:
    return f"ssl_mse_a{alpha:g}_{scheme}"


def _datasets(paths: RunPaths, *splits: str) -> List[MixtureDataset]:
    require(paths.manifest, "simulate")
    return [MixtureDataset(paths.manifest, split) for split in splits]


def _encoder(config: ExperimentConfig, seed: Optional[int] = None) -> FrozenEncoder:
    if seed is None:
        return init_frozen_encoder(config.encoder)
    return init_frozen_encoder(replace(config.encoder, seed=seed, checkpoint=None))


def _load_se(config: ExperimentConfig, checkpoint: Path) -> ConvTasNet:
    model = ConvTasNet(config.model)
    load_se_state(model, checkpoint)
    return model.eval()


def unprocessed_si_sdr(dataset: MixtureDataset) -> float:
    """Mean SI-SDR of the mixtures against their sources."""
    values = [float(si_sdr(mixture, source)) for mixture, source, _ in dataset]
    return sum(values) / len(values)


@torch.no_grad()
def se_metrics(
    frontend: Optional[nn.Module],
    dataset: MixtureDataset,
    encoder: FrozenEncoder,
    batch_size: int = 8,
) -> Tuple[float, float]:
    """Mean SI-SDR and last-layer SSL-MSE of ``frontend`` outputs, the mixtures themselves without a frontend."""
    wrapper = ModelWrapper(frontend)
    total_sdr, total_ssl_mse = 0.0, 0.0
    for start in range(0, len(dataset), batch_size):
        items = [dataset[i] for i in range(start, min(start + batch_size, len(dataset)))]
        noisy = torch.stack([item[0] for item in items])
        clean = torch.stack([item[1] for item in items])
        enhanced = wrapper(noisy)
        total_sdr += float(si_sdr(enhanced, clean).sum())
        total_ssl_mse += float(ssl_mse_distance(encoder, enhanced, clean).sum())
    return total_sdr / len(dataset), total_ssl_mse / len(dataset)


def probe_key(config: ExperimentConfig, encoder: FrozenEncoder, train_mode: str) -> str:
    """Short hash of the encoder weights together with the probe and corpus settings."""
    corpus = asdict(config.corpus)
    # the worker count does not change the generated items
    corpus.pop("num_workers")
    data = {
        "encoder": parameters_checksum(encoder),
        "probe": asdict(replace(config.probe, train_mode=train_mode)),
        "corpus": corpus,
    }
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def save_probe(path: Path, probe: DownstreamProbe, dev_accuracy: float) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(path, probe.state_dict(), {"dev_accuracy": dev_accuracy})


def load_probe(path: Path, encoder: FrozenEncoder, n_classes: int) -> DownstreamProbe:
    n_layers, dim, _ = encoder.layer_dims()
    probe = DownstreamProbe(n_layers, dim, n_classes)
    tensors, _ = load_checkpoint(path)
    try:
        probe.load_state_dict(tensors)
    except RuntimeError as e:
        raise CheckpointError(
            f"{path} does not hold a probe for N={n_layers}, D={dim}, C={n_classes}: {e}"
        ) from e
    return probe


def get_probe(
    config: ExperimentConfig,
    paths: RunPaths,
    encoder: FrozenEncoder,
    encoder_tag: str,
    train_mode: str,
    verbose: bool = False,
) -> Tuple[DownstreamProbe, Path]:
    """Probe of ``encoder`` for ``train_mode`` and its checkpoint path.

    The checkpoint name carries :func:`probe_key`, so a probe is loaded from ``probe/`` only when it
    matches the current encoder and settings; otherwise it is trained and saved.
    """
    path = paths.probe_checkpoint(encoder_tag, train_mode, probe_key(config, encoder, train_mode))
    if path.exists():
        logger.info(f"Reusing probe {path}")
        return load_probe(path, encoder, config.corpus.token_count), path

    train_set, dev_set = _datasets(paths, "train", "dev")
    result = train_probe(
        train_set,
        dev_set,
        encoder,
        config.corpus.token_count,
        config=replace(config.probe, train_mode=train_mode),
        verbose=verbose,
    )
    save_probe(path, result.probe, result.dev_accuracy)
    return result.probe, path


def simulate(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    manifest = build_corpus(config.corpus, paths.corpus, verbose=verbose)
    return {
        "manifest": paths.relative(manifest),
        "items": {split: config.corpus.count(split) for split in SPLITS},
    }


def pretrain(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    train_set, dev_set = _datasets(paths, "train", "dev")
    encoder = _encoder(config)
    model = init_se_model(config.model, config.seed)

    result = pretrain_se(
        train_set, dev_set, model, config.train, encoder, paths.pretrain, verbose
    )
    best = result.log[result.best_epoch - 1]
    noisy_sdr = unprocessed_si_sdr(dev_set)
    logger.info(
        f"Pretraining: dev SI-SDR {best.dev_si_sdr:.2f} dB, "
        f"unprocessed {noisy_sdr:.2f} dB"
    )
    return {
        "best_epoch": result.best_epoch,
        "best_dev_loss": result.best_dev_loss,
        "dev_si_sdr": best.dev_si_sdr,
        "dev_si_sdr_unprocessed": noisy_sdr,
        "dev_si_sdr_improvement": best.dev_si_sdr - noisy_sdr,
        "dev_ssl_mse": best.dev_ssl_mse,
        "checkpoint": paths.relative(result.best_checkpoint),
    }


def _finetune_from_pretrained(
    config: ExperimentConfig,
    paths: RunPaths,
    loss_config: LossConfig,
    out_dir: Path,
    train_set: MixtureDataset,
    dev_set: MixtureDataset,
    encoder: FrozenEncoder,
    verbose: bool,
) -> Tuple[ConvTasNet, Dict[str, Any]]:
    model = _load_se(config, require(paths.checkpoint(paths.pretrain), "pretrain"))
    baseline = evaluate_se(model, dev_set, SNRObjective(), encoder, config.train.batch_size)

    result = finetune_sslmse(
        train_set, dev_set, model, encoder, loss_config, config.train, out_dir, verbose
    )
    best = result.log[result.best_epoch - 1]
    return result.model, {
        "best_epoch": result.best_epoch,
        "best_dev_loss": result.best_dev_loss,
        "dev_si_sdr": best.dev_si_sdr,
        "dev_ssl_mse": best.dev_ssl_mse,
        "dev_ssl_mse_pretrained": baseline["ssl_mse_last"],
        "dev_si_sdr_pretrained": baseline["si_sdr"],
        "checkpoint": paths.relative(result.best_checkpoint),
    }


def finetune(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    train_set, dev_set = _datasets(paths, "train", "dev")
    encoder = _encoder(config)
    _, metrics = _finetune_from_pretrained(
        config, paths, config.loss, paths.finetune, train_set, dev_set, encoder, verbose
    )
    metrics["encoder_checksum"] = parameters_checksum(encoder)
    return metrics


def train_probe_command(
    config: ExperimentConfig, paths: RunPaths, verbose: bool = False
) -> Dict[str, Any]:
    train_set, dev_set = _datasets(paths, "train", "dev")
    encoder = _encoder(config)
    result = train_probe(
        train_set, dev_set, encoder, config.corpus.token_count, config=config.probe, verbose=verbose
    )
    path = paths.probe_checkpoint(
        "main", config.probe.train_mode, probe_key(config, encoder, config.probe.train_mode)
    )
    save_probe(path, result.probe, result.dev_accuracy)
    return {
        "train_mode": config.probe.train_mode,
        "dev_accuracy": result.dev_accuracy,
        "final_train_loss": result.train_losses[-1],
        "checkpoint": paths.relative(path),
    }


def _frontends(config: ExperimentConfig, paths: RunPaths) -> List[Tuple[str, Optional[nn.Module], str]]:
    frontends = [(NO_SE_TAG, None, "-")]
    for tag, stage_dir in (
        (SNR_SE_TAG, paths.pretrain),
        (ssl_mse_tag(config.loss.alpha, config.loss.scheme), paths.finetune),
    ):
        checkpoint = paths.checkpoint(stage_dir)
        if checkpoint.exists():
            frontends.append((tag, _load_se(config, checkpoint), paths.relative(checkpoint)))
    return frontends


def evaluate(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    eval_splits = ("dev", "eval")
    datasets = dict(zip(eval_splits, _datasets(paths, *eval_splits)))
    encoders = [("main", _encoder(config))]
    if config.evaluate.mismatch_encoder_seed is not None:
        encoders.append(("mismatch", _encoder(config, config.evaluate.mismatch_encoder_seed)))
    frontends = _frontends(config, paths)

    metric_rows, probe_rows, summary = [], [], {}
    main_encoder = encoders[0][1]
    for tag, frontend, source in frontends:
        for split, dataset in datasets.items():
            sdr, distance = se_metrics(frontend, dataset, main_encoder, config.train.batch_size)
            metric_rows.append(
                {"frontend_tag": tag, "split": split, "si_sdr": sdr, "ssl_mse_last": distance, "source": source}
            )
            summary[f"{tag}/{split}/si_sdr"] = sdr
            summary[f"{tag}/{split}/ssl_mse_last"] = distance

    for encoder_tag, encoder in encoders:
        for train_mode in TRAIN_MODES:
            probe, probe_path = get_probe(config, paths, encoder, encoder_tag, train_mode, verbose)
            probe_source = paths.relative(probe_path)
            for tag, frontend, _ in frontends:
                for split, dataset in datasets.items():
                    for input_kind in ("noisy", "clean"):
                        accuracy = eval_probe(
                            dataset,
                            encoder,
                            probe,
                            frontend,
                            use_mixture=input_kind == "noisy",
                            batch_size=config.probe.batch_size,
                        )
                        probe_rows.append(
                            {
                                "frontend_tag": tag,
                                "encoder": encoder_tag,
                                "train_mode": train_mode,
                                "split": split,
                                "input": input_kind,
                                "accuracy": accuracy,
                                "source": probe_source,
                            }
                        )

    paths.evaluate.mkdir(parents=True, exist_ok=True)
    write_csv(paths.evaluate / "metrics.csv", metric_rows, METRICS_COLUMNS)
    write_csv(paths.evaluate / "probe_results.csv", probe_rows, PROBE_COLUMNS)
    logger.info(f"Wrote {paths.evaluate}")
    summary["frontends"] = [tag for tag, _, _ in frontends]
    return summary


def plot_positions(alphas: Sequence[float]) -> List[float]:
    r"""Abscissae of a log-like axis: :math:`\log_{10}\alpha`, with :math:`\alpha = 0` one decade
    left of the smallest positive weight."""
    positive = [math.log10(alpha) for alpha in alphas if alpha > 0]
    zero_x = (min(positive) - 1.0) if positive else 0.0
    return [math.log10(alpha) if alpha > 0 else zero_x for alpha in alphas]


def sweep_alpha(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    alphas = list(config.sweep.alphas)
    if not alphas:
        raise ConfigError("empty alpha list: set sweep.alphas.")
    if any(alpha < 0 for alpha in alphas):
        raise ConfigError(f"sweep.alphas must be nonnegative. Got {alphas}.")
    require(paths.checkpoint(paths.pretrain), "pretrain")

    train_set, dev_set = _datasets(paths, "train", "dev")
    encoder = _encoder(config)
    probe, _ = get_probe(config, paths, encoder, "main", "official", verbose)

    rows = []
    for alpha in alphas:
        loss_config = replace(config.loss, alpha=alpha)
        out_dir = paths.sweep / f"alpha_{alpha:g}"
        model, _ = _finetune_from_pretrained(
            config, paths, loss_config, out_dir, train_set, dev_set, encoder, verbose
        )
        sdr, distance = se_metrics(model, dev_set, encoder, config.train.batch_size)
        accuracy = {
            input_kind: eval_probe(
                dev_set,
                encoder,
                probe,
                model,
                use_mixture=input_kind == "noisy",
                batch_size=config.probe.batch_size,
            )
            for input_kind in ("noisy", "clean")
        }
        rows.append(
            {
                "alpha": float(alpha),
                "dev_si_sdr": sdr,
                "dev_ssl_mse_last": distance,
                "probe_acc_noisy": accuracy["noisy"],
                "probe_acc_clean": accuracy["clean"],
            }
        )
        logger.info(
            f"alpha={alpha:g}: dev SI-SDR {sdr:.2f} dB, dev SSL-MSE {distance:.5f}, "
            f"probe accuracy {accuracy['noisy']:.3f} (noisy) / {accuracy['clean']:.3f} (clean)"
        )

    plot_rows = [
        {"series": series, "alpha": row["alpha"], "x": x, "value": row[series]}
        for series in ("dev_si_sdr", "probe_acc_noisy")
        for row, x in zip(rows, plot_positions(alphas))
    ]
    write_csv(paths.sweep / "tradeoff.csv", rows, TRADEOFF_COLUMNS)
    write_csv(paths.sweep / "tradeoff_plot.csv", plot_rows, PLOT_COLUMNS)
    return {"alphas": [float(alpha) for alpha in alphas], "rows": len(rows)}


def gradcheck(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    rows = []
    for scheme in LAYER_WEIGHT_SCHEMES:
        for alpha in GRADCHECK_ALPHAS:
            result = grad_check(loss_config=LossConfig(alpha=alpha, scheme=scheme), seed=config.seed)
            rows.append(
                {
                    "scheme": scheme,
                    "alpha": alpha,
                    "max_relative_error": result.max_relative_error,
                    "num_parameters": result.num_parameters,
                    "passed": int(result.max_relative_error < GRADCHECK_TOLERANCE),
                }
            )
    paths.gradcheck.mkdir(parents=True, exist_ok=True)
    write_csv(paths.gradcheck / "gradcheck.csv", rows, GRADCHECK_COLUMNS)
    max_error = max(row["max_relative_error"] for row in rows)
    return {
        "max_relative_error": max_error,
        "tolerance": GRADCHECK_TOLERANCE,
        "passed": all(row["passed"] for row in rows),
    }


def _frontend_rank(tag: str) -> int:
    return {NO_SE_TAG: 0, SNR_SE_TAG: 1}.get(tag, 2)


def collect_report_rows(paths: RunPaths) -> List[Dict[str, str]]:
    r"""Comparison rows ordered no SE, SNR-trained SE, then SSL-MSE variants.

    Evaluate results give the eval-split rows with the accuracy of the clean-trained probe of the
    main encoder; the sweep gives development rows. Every row names its source files.

    Raises:
        ConfigError: if neither evaluate nor sweep results exist.
    """
    metrics_path = paths.evaluate / "metrics.csv"
    probes_path = paths.evaluate / "probe_results.csv"
    tradeoff_path = paths.sweep / "tradeoff.csv"

    rows = []
    if metrics_path.exists() and probes_path.exists():
        accuracy = {
            (row["frontend_tag"], row["input"]): row["accuracy"]
            for row in read_csv(probes_path)
            if row["encoder"] == "main" and row["train_mode"] == "official" and row["split"] == "eval"
        }
        source = f"{paths.relative(metrics_path)};{paths.relative(probes_path)}"
        for row in read_csv(metrics_path):
            if row["split"] != "eval":
                continue
            tag = row["frontend_tag"]
            rows.append(
                {
                    "frontend": tag,
                    "split": "eval",
                    "si_sdr": row["si_sdr"],
                    "ssl_mse_last": row["ssl_mse_last"],
                    "probe_acc_noisy": accuracy.get((tag, "noisy"), ""),
                    "probe_acc_clean": accuracy.get((tag, "clean"), ""),
                    "source": source,
                }
            )
    if tradeoff_path.exists():
        for row in read_csv(tradeoff_path):
            rows.append(
                {
                    "frontend": f"ssl_mse_sweep_a{float(row['alpha']):g}",
                    "split": "dev",
                    "si_sdr": row["dev_si_sdr"],
                    "ssl_mse_last": row["dev_ssl_mse_last"],
                    "probe_acc_noisy": row["probe_acc_noisy"],
                    "probe_acc_clean": row["probe_acc_clean"],
                    "source": paths.relative(tradeoff_path),
                }
            )
    if not rows:
        raise ConfigError(
            f"no runs found in {paths.root}: run `evaluate` or `sweep-alpha` first."
        )
    return sorted(rows, key=lambda row: _frontend_rank(row["frontend"]))


def format_table(rows: Sequence[Dict[str, str]], columns: Sequence[str]) -> str:
    """Fixed-width text table."""
    widths = [max([len(column)] + [len(str(row[column])) for row in rows]) for column in columns]
    lines = ["  ".join(column.ljust(width) for column, width in zip(columns, widths))]
    lines.append("  ".join("-" * width for width in widths))
    for row in rows:
        lines.append("  ".join(str(row[column]).ljust(width) for column, width in zip(columns, widths)))
    return "\n".join(line.rstrip() for line in lines)


def report(config: ExperimentConfig, paths: RunPaths, verbose: bool = False) -> Dict[str, Any]:
    rows = collect_report_rows(paths)
    write_csv(paths.root / "report.csv", rows, REPORT_COLUMNS)
    print(format_table(rows, REPORT_COLUMNS))
    return {"rows": len(rows), "report": "report.csv"}


def enhance_file(
    config: ExperimentConfig, input_path: Path, output_path: Path, checkpoint: Path
) -> Dict[str, Any]:
    model = _load_se(config, checkpoint)
    noisy = read_wav(input_path)
    enhanced = enhance(model, noisy)
    write_wav(output_path, enhanced)
    return {
        "input": str(input_path),
        "output": str(output_path),
        "checkpoint": str(checkpoint),
        "num_samples": noisy.num_samples,
    }


SUBCOMMANDS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "simulate": simulate,
    "pretrain": pretrain,
    "finetune": finetune,
    "train-probe": train_probe_command,
    "evaluate": evaluate,
    "sweep-alpha": sweep_alpha,
    "gradcheck": gradcheck,
    "report": report,
}
