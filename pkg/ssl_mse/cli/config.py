# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import dataclasses
import hashlib
import json
import os
import subprocess
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml
from loguru import logger

from ssl_mse.datasim import CorpusConfig
from ssl_mse.downstream import ProbeConfig
from ssl_mse.encoder import EncoderConfig
from ssl_mse.loss import LossConfig
from ssl_mse.model import SEConfig
from ssl_mse.training import TrainConfig
from ssl_mse.utils import ConfigError

DEFAULT_ALPHAS = (0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0)


@dataclass
class SweepConfig:
    """SNR weights of the tradeoff sweep."""

    alphas: List[float] = field(
        default_factory=lambda: list(DEFAULT_ALPHAS),
        metadata={"help": "SNR weights, each fine-tuned from the pretrained model."},
    )


@dataclass
class EvaluateConfig:
    """Options of the ``evaluate`` subcommand."""

    mismatch_encoder_seed: Optional[int] = field(
        default=None,
        metadata={"help": "seed of a second frozen encoder unseen during fine-tuning, none to skip."},
    )


@dataclass
class ExperimentConfig:
    r"""Every setting of an experiment. ``seed`` drives the SE initialization; ``--seed`` also sets
    the batch-order and probe seeds."""

    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    model: SEConfig = field(default_factory=SEConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    seed: int = field(default=0, metadata={"help": "seed of the SE initialization."})
    out_dir: str = field(default="runs/desk", metadata={"help": "artifact directory."})

    def __post_init__(self) -> None:
        if self.corpus.label_hop != self.encoder.hop:
            raise ConfigError(
                f"corpus.label_hop ({self.corpus.label_hop}) must equal encoder.hop ({self.encoder.hop})."
            )


def _coerce(value: Any, default: Any, key: str) -> Any:
    # YAML reads "1e-4" as a string
    try:
        if isinstance(default, bool) or default is None:
            return value
        if isinstance(default, float) and isinstance(value, (int, str)):
            return float(value)
        if isinstance(default, int) and isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(default, (list, tuple)) and isinstance(value, (list, tuple)):
            if default and isinstance(default[0], float):
                value = [float(v) for v in value]
            return type(default)(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for config key '{key}': {value!r}") from e
    return value


def _build(cls: type, data: Dict[str, Any], prefix: str = "") -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{prefix.rstrip('.')}' must be a mapping.")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown config key: {prefix}{unknown[0]}")

    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        key = prefix + f.name
        if f.default_factory is not dataclasses.MISSING:
            default = f.default_factory()
        else:
            default = f.default
        if dataclasses.is_dataclass(default):
            kwargs[f.name] = _build(type(default), data[f.name], key + ".")
        else:
            kwargs[f.name] = _coerce(data[f.name], default, key)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid config section '{prefix.rstrip('.') or 'root'}': {e}") from e


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from nested mappings, rejecting unknown keys."""
    return _build(ExperimentConfig, data or {})


def apply_override(data: Dict[str, Any], override: str) -> None:
    """Apply one ``dotted.key=value`` override in place; the value is parsed as a YAML scalar."""
    if "=" not in override:
        raise ConfigError(f"malformed override '{override}', expected key=value.")
    path, raw = override.split("=", 1)
    keys = path.strip().split(".")
    node = data
    for depth, key in enumerate(keys[:-1]):
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"unknown config key: {'.'.join(keys[: depth + 1])}")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"unknown config key: {path.strip()}")
    node[keys[-1]] = yaml.safe_load(raw)


def _merge(base: Dict[str, Any], update: Dict[str, Any], prefix: str = "") -> None:
    for key, value in update.items():
        if key not in base:
            raise ConfigError(f"unknown config key: {prefix}{key}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, f"{prefix}{key}.")
        else:
            base[key] = value


def load_config(
    path: Optional[Union[str, os.PathLike]] = None,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
    out_dir: Optional[Union[str, os.PathLike]] = None,
) -> ExperimentConfig:
    r"""Resolve the experiment configuration: defaults, then the YAML file, then ``--set`` overrides,
    then ``--seed`` and ``--out``.

    Args:
        path (Optional[Union[str, os.PathLike]]): YAML file, defaults only when omitted.
        overrides (Sequence[str]): ``dotted.key=value`` strings.
        seed (Optional[int]): sets ``seed``, ``train.seed`` and ``probe.seed``.
        out_dir (Optional[Union[str, os.PathLike]]): sets ``out_dir``.

    Raises:
        ConfigError: on unknown keys, malformed overrides or invalid values.

    Returns:
        ExperimentConfig: the resolved configuration.
    """
    data = asdict(ExperimentConfig())
    if path is not None:
        with open(path) as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must contain a mapping.")
        _merge(data, loaded)
    for override in overrides:
        apply_override(data, override)
    if seed is not None:
        data["seed"] = data["train"]["seed"] = data["probe"]["seed"] = seed
    if out_dir is not None:
        data["out_dir"] = str(out_dir)
    return config_from_dict(data)


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """Plain nested representation, tuples turned into lists."""
    return json.loads(json.dumps(asdict(config)))


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of ``config``."""
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_config(config: ExperimentConfig, path: Union[str, os.PathLike]) -> None:
    with open(path, "w") as f:
        yaml.safe_dump(config_to_dict(config), f, sort_keys=True)


def git_describe(cwd: Optional[Union[str, os.PathLike]] = None) -> Optional[str]:
    """``git describe --always --dirty`` of the source tree, ``None`` outside a repository."""
    cwd = cwd or Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=cwd,
            capture_output=True,
            text=True,
            check=True,
        )
    except (OSError, subprocess.CalledProcessError):
        logger.warning("git describe is not available, the run summary has no source revision")
        return None
    return out.stdout.strip() or None

