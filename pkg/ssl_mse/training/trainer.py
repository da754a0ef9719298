# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import copy
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import torch
from loguru import logger
from torch import nn, Tensor
from torch.utils.data import DataLoader, Dataset

from ssl_mse.encoder import FrozenEncoder
from ssl_mse.loss import LossBreakdown, LossConfig, multitask_loss, MultitaskLoss
from ssl_mse.loss.snr import snr_training_loss
from ssl_mse.loss.ssl_mse import ssl_mse_distance
from ssl_mse.signal import si_sdr
from ssl_mse.training.checkpoint import load_checkpoint, save_checkpoint
from ssl_mse.training.schedule import lr_schedule_step, make_plateau_scheduler
from ssl_mse.utils import (
    FrozenParameterError,
    NonFiniteLossError,
    parameters_checksum,
    progress,
    write_csv,
)

LOG_COLUMNS = ("epoch", "lr", "train_total", "dev_total", "dev_ssl_mse", "dev_si_sdr")
LOSS_LOG_COLUMNS = ("epoch", "split", "ssl_mse", "snr_term", "total", "alpha", "scheme")
CHECKPOINT_NAME = "best.ckpt"
LOG_NAME = "log.csv"
LOSS_LOG_NAME = "loss_log.csv"


@dataclass
class TrainConfig:
    """Recipe of both SE training stages."""

    lr_pretrain: float = field(default=5e-4, metadata={"help": "initial lr of SNR pretraining."})
    lr_finetune: float = field(default=1e-4, metadata={"help": "initial lr of SSL-MSE fine-tuning."})
    plateau_factor: float = field(default=0.75, metadata={"help": "lr decay on a dev-loss plateau."})
    plateau_patience: int = field(
        default=2, metadata={"help": "non-improving epochs before the lr decays."}
    )
    max_epochs_pretrain: int = field(default=30, metadata={"help": "pretraining epochs."})
    max_epochs_finetune: int = field(default=15, metadata={"help": "fine-tuning epochs."})
    batch_size: int = field(default=8, metadata={"help": "utterances per step."})
    seed: int = field(default=0, metadata={"help": "seed of the batch order."})
    grad_clip: float = field(default=5.0, metadata={"help": "global gradient-norm clip."})
    betas: Tuple[float, float] = field(
        default=(0.9, 0.999), metadata={"help": "Adam moment coefficients."}
    )
    adam_eps: float = field(default=1e-8, metadata={"help": "Adam denominator floor."})

    def __post_init__(self) -> None:
        self.betas = tuple(self.betas)
        if not 0 < self.plateau_factor < 1:
            raise ValueError(f"plateau_factor must be in (0, 1). Got {self.plateau_factor}.")
        if self.plateau_patience < 1:
            raise ValueError(f"plateau_patience must be at least 1. Got {self.plateau_patience}.")
        for name in ("max_epochs_pretrain", "max_epochs_finetune", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive. Got {getattr(self, name)}.")
        if self.lr_pretrain <= 0 or self.lr_finetune <= 0:
            raise ValueError("learning rates must be positive.")


@dataclass
class EpochLog:
    """One row of the training log."""

    epoch: int = field(metadata={"help": "epoch index, starting at 1."})
    lr: float = field(metadata={"help": "learning rate used during the epoch."})
    train_total: float = field(metadata={"help": "mean training loss."})
    dev_total: float = field(metadata={"help": "mean development loss."})
    dev_ssl_mse: float = field(metadata={"help": "development SSL-MSE on the last layer."})
    dev_si_sdr: float = field(metadata={"help": "development SI-SDR in dB."})


@dataclass
class TrainResult:
    """Outcome of a training stage. ``model`` holds the best-dev parameters."""

    model: nn.Module = field(metadata={"help": "trained SE model."})
    log: List[EpochLog] = field(metadata={"help": "per-epoch log rows."})
    best_dev_loss: float = field(metadata={"help": "lowest development loss."})
    best_epoch: int = field(metadata={"help": "epoch of the lowest development loss."})
    best_checkpoint: Optional[Path] = field(
        default=None, metadata={"help": "best-dev checkpoint, if an output directory was given."}
    )


class SNRObjective(nn.Module):
    """Pretraining objective: the batch-mean SNR loss, reported as a :class:`LossBreakdown` with a zero SSL-MSE term."""

    alpha = 1.0
    scheme = "none"

    def forward(self, enhanced: Tensor, clean: Tensor) -> LossBreakdown:
        snr_value = torch.mean(snr_training_loss(enhanced, clean))
        return multitask_loss(torch.zeros_like(snr_value), snr_value, self.alpha)


def _objective_tags(objective: nn.Module) -> Tuple[float, str]:
    if isinstance(objective, MultitaskLoss):
        return objective.config.alpha, objective.config.scheme
    return objective.alpha, objective.scheme


def _check_finite(breakdown: LossBreakdown) -> bool:
    return all(math.isfinite(value) for value in breakdown.as_floats().values())


@torch.no_grad()
def evaluate_se(
    model: nn.Module,
    dataset: Dataset,
    objective: nn.Module,
    encoder: Optional[FrozenEncoder] = None,
    batch_size: int = 8,
) -> Dict[str, float]:
    r"""Development metrics of an SE model, averaged over utterances.

    Args:
        model (nn.Module): SE model.
        dataset (Dataset): ``(mixture, source, labels)`` items.
        objective (nn.Module): training objective returning a :class:`LossBreakdown`.
        encoder (Optional[FrozenEncoder]): encoder of the SSL-MSE distance, NaN is reported without it.
        batch_size (int): utterances per forward pass. Defaults to 8.

    Returns:
        Dict[str, float]: ``ssl_mse``, ``snr_term``, ``total``, ``ssl_mse_last`` and ``si_sdr``.
    """
    was_training = model.training
    model.eval()

    sums = dict.fromkeys(("ssl_mse", "snr_term", "total", "ssl_mse_last", "si_sdr"), 0.0)
    count = 0
    for noisy, clean, *_ in DataLoader(dataset, batch_size=batch_size, shuffle=False):
        enhanced = model(noisy)
        size = noisy.shape[0]
        for key, value in objective(enhanced, clean).as_floats().items():
            sums[key] += value * size
        sums["si_sdr"] += float(si_sdr(enhanced, clean).sum())
        if encoder is not None:
            sums["ssl_mse_last"] += float(ssl_mse_distance(encoder, enhanced, clean).sum())
        count += size

    model.train(was_training)
    metrics = {key: value / count for key, value in sums.items()}
    if encoder is None:
        metrics["ssl_mse_last"] = math.nan
    return metrics


def _fit(
    stage: str,
    model: nn.Module,
    train_set: Dataset,
    dev_set: Dataset,
    objective: nn.Module,
    lr: float,
    max_epochs: int,
    config: TrainConfig,
    encoder: Optional[FrozenEncoder],
    out_dir: Optional[Path],
    verbose: bool,
) -> TrainResult:
    alpha, scheme = _objective_tags(objective)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=lr, betas=config.betas, eps=config.adam_eps
    )
    scheduler = make_plateau_scheduler(
        optimizer, config.plateau_factor, config.plateau_patience
    )
    loader = DataLoader(
        train_set,
        batch_size=config.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(config.seed),
    )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    log: List[EpochLog] = []
    loss_log: List[Dict[str, object]] = []
    best_dev_loss, best_epoch, best_state = math.inf, 0, None

    for epoch in progress(range(1, max_epochs + 1), verbose=verbose, desc=stage):
        model.train()
        current_lr = optimizer.param_groups[0]["lr"]
        sums = dict.fromkeys(("ssl_mse", "snr_term", "total"), 0.0)
        count = 0
        for batch_id, (noisy, clean, *_) in enumerate(loader):
            breakdown = objective(model(noisy), clean)
            if not _check_finite(breakdown):
                raise NonFiniteLossError(stage, epoch=epoch, batch=batch_id)

            optimizer.zero_grad()
            breakdown.total.backward()
            nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()

            for key, value in breakdown.as_floats().items():
                sums[key] += value * noisy.shape[0]
            count += noisy.shape[0]

        train_means = {key: value / count for key, value in sums.items()}
        dev = evaluate_se(model, dev_set, objective, encoder, config.batch_size)
        if not math.isfinite(dev["total"]):
            raise NonFiniteLossError(stage, epoch=epoch)

        log.append(
            EpochLog(
                epoch=epoch,
                lr=current_lr,
                train_total=train_means["total"],
                dev_total=dev["total"],
                dev_ssl_mse=dev["ssl_mse_last"],
                dev_si_sdr=dev["si_sdr"],
            )
        )
        for split, means in (("train", train_means), ("dev", dev)):
            loss_log.append(
                {
                    "epoch": epoch,
                    "split": split,
                    "ssl_mse": means["ssl_mse"],
                    "snr_term": means["snr_term"],
                    "total": means["total"],
                    "alpha": float(alpha),
                    "scheme": scheme,
                }
            )

        if dev["total"] < best_dev_loss:
            best_dev_loss, best_epoch = dev["total"], epoch
            best_state = copy.deepcopy(model.state_dict())
            if out_dir is not None:
                save_checkpoint(
                    out_dir / CHECKPOINT_NAME,
                    best_state,
                    {"epoch": float(epoch), "lr": current_lr, "best_dev_loss": best_dev_loss},
                )

        new_lr = lr_schedule_step(scheduler, dev["total"])
        logger.info(
            f"[{stage}] epoch {epoch}: lr {current_lr:.3e} train {train_means['total']:.4f} "
            f"dev {dev['total']:.4f} dev SI-SDR {dev['si_sdr']:.2f} dB"
            + (f" -> lr {new_lr:.3e}" if new_lr != current_lr else "")
        )

    model.load_state_dict(best_state)
    model.eval()

    best_checkpoint = None
    if out_dir is not None:
        best_checkpoint = out_dir / CHECKPOINT_NAME
        write_csv(out_dir / LOG_NAME, [asdict(row) for row in log], LOG_COLUMNS)
        write_csv(out_dir / LOSS_LOG_NAME, loss_log, LOSS_LOG_COLUMNS)
        logger.info(f"Best dev loss {best_dev_loss:.4f} at epoch {best_epoch}, wrote {out_dir}")

    return TrainResult(
        model=model,
        log=log,
        best_dev_loss=best_dev_loss,
        best_epoch=best_epoch,
        best_checkpoint=best_checkpoint,
    )


def _frozen_run(encoder: Optional[FrozenEncoder], run) -> TrainResult:
    if encoder is None:
        return run()
    checksum = parameters_checksum(encoder)
    result = run()
    if parameters_checksum(encoder) != checksum:
        raise FrozenParameterError("SE training modified the frozen encoder.")
    return result


def _as_dir(out_dir: Optional[Union[str, os.PathLike]]) -> Optional[Path]:
    return Path(out_dir) if out_dir is not None else None


def pretrain_se(
    train_set: Dataset,
    dev_set: Dataset,
    model: nn.Module,
    config: Optional[TrainConfig] = None,
    encoder: Optional[FrozenEncoder] = None,
    out_dir: Optional[Union[str, os.PathLike]] = None,
    verbose: bool = False,
) -> TrainResult:
    r"""First stage: train the SE model with the SNR loss alone.

    Adam with the plateau rule, gradients clipped to a global norm of ``config.grad_clip``. The
    parameters of the best development epoch are restored at the end and, with ``out_dir``, saved
    to ``best.ckpt`` next to ``log.csv`` and ``loss_log.csv``.

    Args:
        train_set (Dataset): ``(mixture, source, labels)`` training items of equal length.
        dev_set (Dataset): development items.
        model (nn.Module): SE model, updated in place.
        config (Optional[TrainConfig]): recipe, defaults to :class:`TrainConfig`.
        encoder (Optional[FrozenEncoder]): only used to report the development SSL-MSE.
        out_dir (Optional[Union[str, os.PathLike]]): artifact directory.
        verbose (bool): show a progress bar. Defaults to False.

    Raises:
        NonFiniteLossError: if a batch loss or the development loss is not finite.

    Returns:
        TrainResult: trained model and log.
    """
    config = config or TrainConfig()
    return _frozen_run(
        encoder,
        lambda: _fit(
            "pretrain",
            model,
            train_set,
            dev_set,
            SNRObjective(),
            config.lr_pretrain,
            config.max_epochs_pretrain,
            config,
            encoder,
            _as_dir(out_dir),
            verbose,
        ),
    )


def finetune_sslmse(
    train_set: Dataset,
    dev_set: Dataset,
    model: nn.Module,
    encoder: FrozenEncoder,
    loss_config: Optional[LossConfig] = None,
    config: Optional[TrainConfig] = None,
    out_dir: Optional[Union[str, os.PathLike]] = None,
    verbose: bool = False,
) -> TrainResult:
    r"""Second stage: continue training a pretrained SE model on the multitask loss
    :math:`\mathcal{L}_{\text{SSL-MSE}} + \alpha \mathcal{L}_{\text{SNR}}` through the frozen encoder.

    Args:
        train_set (Dataset): ``(mixture, source, labels)`` training items of equal length.
        dev_set (Dataset): development items.
        model (nn.Module): pretrained SE model, updated in place.
        encoder (FrozenEncoder): frozen feature extractor.
        loss_config (Optional[LossConfig]): objective, defaults to :class:`LossConfig`.
        config (Optional[TrainConfig]): recipe, defaults to :class:`TrainConfig`.
        out_dir (Optional[Union[str, os.PathLike]]): artifact directory.
        verbose (bool): show a progress bar. Defaults to False.

    Raises:
        ValueError: if the utterances are shorter than the encoder's receptive field.
        NonFiniteLossError: if a batch loss or the development loss is not finite.
        FrozenParameterError: if the encoder changed.

    Returns:
        TrainResult: trained model and log.
    """
    config = config or TrainConfig()
    loss_config = loss_config or LossConfig()
    for name, dataset in (("train", train_set), ("dev", dev_set)):
        num_samples = dataset[0][0].shape[-1]
        if num_samples < encoder.config.frontend_kernel:
            raise ValueError(
                f"shape mismatch: {name} utterances have {num_samples} samples, the encoder "
                f"needs at least {encoder.config.frontend_kernel}."
            )

    return _frozen_run(
        encoder,
        lambda: _fit(
            "finetune",
            model,
            train_set,
            dev_set,
            MultitaskLoss(encoder, loss_config),
            config.lr_finetune,
            config.max_epochs_finetune,
            config,
            encoder,
            _as_dir(out_dir),
            verbose,
        ),
    )


def load_se_state(model: nn.Module, path: Union[str, os.PathLike]) -> Dict[str, float]:
    """Load a best-dev checkpoint into ``model`` and return its state scalars."""
    tensors, state = load_checkpoint(path)
    model.load_state_dict(tensors)
    return state

