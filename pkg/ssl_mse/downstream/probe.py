# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import torch
import torch.nn.functional as F
from loguru import logger
from torch import nn, Tensor

from ssl_mse.downstream.weighted_sum import TaskWeights
from ssl_mse.encoder import FeatureStack, FrozenEncoder
from ssl_mse.utils import FrozenParameterError, ModelWrapper, parameters_checksum, progress

TRAIN_MODES = ("official", "noise_robust")


@dataclass
class ProbeConfig:
    """Training recipe of the frame-classification probe."""

    epochs: int = field(default=20, metadata={"help": "training epochs."})
    lr: float = field(default=1e-2, metadata={"help": "fixed step size."})
    batch_size: int = field(default=8, metadata={"help": "utterances per step."})
    train_mode: str = field(
        default="official",
        metadata={"help": "'official' trains on clean sources, 'noise_robust' on mixtures."},
    )
    seed: int = field(default=0, metadata={"help": "seed of initialization and shuffling."})

    def __post_init__(self) -> None:
        if self.train_mode not in TRAIN_MODES:
            raise ValueError(
                f"{self.train_mode} is not a valid train_mode, expected one of {TRAIN_MODES}."
            )
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1.")


class DownstreamProbe(nn.Module):
    r"""Per-frame linear softmax classifier on the weighted sum of the encoder layers.

    Args:
        n_layers (int): number of encoder layers :math:`N`.
        dim (int): feature dimension :math:`D`.
        n_classes (int): number of classes :math:`C`.
    """

    def __init__(self, n_layers: int, dim: int, n_classes: int) -> None:
        super().__init__()
        self.task_weights = TaskWeights(n_layers)
        self.classifier = nn.Linear(dim, n_classes)

    @property
    def n_classes(self) -> int:
        return self.classifier.out_features

    def forward(self, stack: Union[FeatureStack, Tensor]) -> Tensor:
        """Logits, shape (..., T', C), from features of shape (N, ..., D, T')."""
        features = self.task_weights(stack)
        return self.classifier(features.transpose(-1, -2))


@dataclass
class ProbeResult:
    """Trained probe with its development accuracy and per-epoch training loss."""

    probe: DownstreamProbe
    dev_accuracy: float
    train_losses: List[float] = field(default_factory=list)


def _align(labels: Tensor, num_frames: int) -> Tensor:
    if labels.shape[-1] < num_frames:
        raise ValueError(
            f"label/frame misalignment: {labels.shape[-1]} labels for {num_frames} frames."
        )
    return labels[..., :num_frames]


@torch.no_grad()
def extract_features(
    dataset: Sequence[Tuple[Tensor, Tensor, Tensor]],
    encoder: FrozenEncoder,
    frontend: Optional[nn.Module] = None,
    use_mixture: bool = True,
    batch_size: int = 8,
) -> Tuple[Tensor, Tensor]:
    r"""Frozen pipeline features ``encoder(frontend(input))`` of every item.

    Args:
        dataset (Sequence[Tuple[Tensor, Tensor, Tensor]]): ``(mixture, source, labels)`` items of equal length.
        encoder (FrozenEncoder): frozen feature extractor.
        frontend (Optional[nn.Module]): SE model applied before the encoder, none by default.
        use_mixture (bool): encode the mixtures, otherwise the clean sources. Defaults to True.
        batch_size (int): utterances per forward pass. Defaults to 8.

    Raises:
        ValueError: if the dataset is empty or the labels do not cover every frame.

    Returns:
        Tuple[Tensor, Tensor]: layers of shape (N, items, D, T') and labels of shape (items, T').
    """
    if len(dataset) == 0:
        raise ValueError("empty corpus: no items to extract features from.")
    wrapper = ModelWrapper(frontend)

    layers, labels = [], []
    for start in range(0, len(dataset), batch_size):
        items = [dataset[i] for i in range(start, min(start + batch_size, len(dataset)))]
        inputs = torch.stack([item[0] if use_mixture else item[1] for item in items])
        stack = encoder(wrapper(inputs))
        layers.append(stack.layers)
        labels.append(torch.stack([_align(item[2], stack.num_frames) for item in items]))

    return torch.cat(layers, dim=1), torch.cat(labels, dim=0)


def frame_accuracy(probe: DownstreamProbe, layers: Tensor, labels: Tensor) -> float:
    """Fraction of frames whose argmax class equals the label."""
    with torch.no_grad():
        predictions = probe(layers).argmax(dim=-1)
    return float((predictions == labels).to(torch.float64).mean())


def eval_probe(
    dataset: Sequence[Tuple[Tensor, Tensor, Tensor]],
    encoder: FrozenEncoder,
    probe: DownstreamProbe,
    frontend: Optional[nn.Module] = None,
    use_mixture: bool = True,
    batch_size: int = 8,
) -> float:
    r"""Frame accuracy of the pipeline ``probe(WS(encoder(frontend(input))))`` over every frame of ``dataset``.

    Args:
        dataset (Sequence[Tuple[Tensor, Tensor, Tensor]]): ``(mixture, source, labels)`` items.
        encoder (FrozenEncoder): frozen feature extractor.
        probe (DownstreamProbe): trained probe.
        frontend (Optional[nn.Module]): SE model, none by default.
        use_mixture (bool): evaluate on mixtures, otherwise on clean sources. Defaults to True.
        batch_size (int): utterances per forward pass. Defaults to 8.

    Raises:
        ValueError: if the probe does not match the encoder dimensions.

    Returns:
        float: accuracy in [0, 1].
    """
    n_layers, dim, _ = encoder.layer_dims()
    if probe.task_weights.logits.shape[0] != n_layers or probe.classifier.in_features != dim:
        raise ValueError(
            f"probe does not match the encoder dimensions (N={n_layers}, D={dim})."
        )
    layers, labels = extract_features(dataset, encoder, frontend, use_mixture, batch_size)
    return frame_accuracy(probe, layers, labels)


def train_probe(
    train_set: Sequence[Tuple[Tensor, Tensor, Tensor]],
    dev_set: Sequence[Tuple[Tensor, Tensor, Tensor]],
    encoder: FrozenEncoder,
    n_classes: int,
    frontend: Optional[nn.Module] = None,
    config: Optional[ProbeConfig] = None,
    verbose: bool = False,
) -> ProbeResult:
    r"""Train the layer weights and the linear classifier with per-frame cross-entropy.

    Only the probe is updated; the encoder and the frontend are frozen and their checksums are
    verified after training. In the ``'official'`` mode the probe sees clean sources, in the
    ``'noise_robust'`` mode it sees the noisy mixtures. The development accuracy is measured
    on the same kind of input.

    Args:
        train_set (Sequence[Tuple[Tensor, Tensor, Tensor]]): ``(mixture, source, labels)`` training items.
        dev_set (Sequence[Tuple[Tensor, Tensor, Tensor]]): development items.
        encoder (FrozenEncoder): frozen feature extractor.
        n_classes (int): number of token classes :math:`C`.
        frontend (Optional[nn.Module]): frozen SE model in front of the encoder, none by default.
        config (Optional[ProbeConfig]): recipe, defaults to :class:`ProbeConfig`.
        verbose (bool): show a progress bar. Defaults to False.

    Raises:
        ValueError: on an empty corpus or misaligned labels.
        FrozenParameterError: if the encoder or the frontend changed.

    Returns:
        ProbeResult: trained probe and development accuracy.
    """
    config = config or ProbeConfig()
    use_mixture = config.train_mode == "noise_robust"
    frozen = [encoder] + ([frontend] if frontend is not None else [])
    checksums = [parameters_checksum(module) for module in frozen]

    layers, labels = extract_features(
        train_set, encoder, frontend, use_mixture, config.batch_size
    )
    n_layers, dim, _ = encoder.layer_dims()

    generator = torch.Generator().manual_seed(config.seed)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        probe = DownstreamProbe(n_layers, dim, n_classes)
    optimizer = torch.optim.Adam(probe.parameters(), lr=config.lr)

    train_losses = []
    num_items = labels.shape[0]
    for _ in progress(range(config.epochs), verbose=verbose, desc="probe"):
        order = torch.randperm(num_items, generator=generator)
        epoch_loss = 0.0
        for start in range(0, num_items, config.batch_size):
            index = order[start : start + config.batch_size]
            logits = probe(layers[:, index])
            loss = F.cross_entropy(logits.reshape(-1, n_classes), labels[index].reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss) * len(index)
        train_losses.append(epoch_loss / num_items)

    dev_accuracy = eval_probe(
        dev_set, encoder, probe, frontend, use_mixture, config.batch_size
    )

    if [parameters_checksum(module) for module in frozen] != checksums:
        raise FrozenParameterError("probe training modified a frozen module.")
    logger.info(
        f"Probe ({config.train_mode}) final train loss {train_losses[-1]:.4f}, dev accuracy {dev_accuracy:.4f}"
    )

    return ProbeResult(probe=probe, dev_accuracy=dev_accuracy, train_losses=train_losses)
