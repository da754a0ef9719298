# Copyright (c) Meta Platforms, Inc. and affiliates.
# All rights reserved.
#
# This source code is licensed under the CC-by-NC license found in the
# LICENSE file in the root directory of this source tree.

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

from ssl_mse.cli.commands import enhance_file, RunPaths, SUBCOMMANDS
from ssl_mse.cli.config import config_hash, config_to_dict, git_describe, load_config, save_config
from ssl_mse.utils import (
    CheckpointError,
    ConfigError,
    FrozenParameterError,
    NonFiniteLossError,
)

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML experiment config")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config value, e.g. loss.alpha=0.01 (repeatable)",
    )
    common.add_argument("--seed", type=int, default=None, help="run seed (SE init, batch order, probe)")
    common.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)
    common.add_argument("--verbose", action="store_true", help="show progress bars")

    parser = argparse.ArgumentParser(
        prog="ssl-mse",
        description="Speech enhancement trained through a frozen multi-layer encoder",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name, parents=[common])
        sub.add_argument("--out", default=None, help="output directory (config out_dir)")

    sub = subparsers.add_parser("enhance", parents=[common])
    sub.add_argument("--in", dest="input", required=True, help="noisy WAV file")
    sub.add_argument("--out", dest="output", required=True, help="enhanced WAV file")
    sub.add_argument("--ckpt", required=True, help="SE checkpoint")
    return parser


def write_run_summary(path: Path, summary: Dict[str, Any]) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def run(
    subcommand: str,
    config_path: Optional[str] = None,
    overrides: Sequence[str] = (),
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
    verbose: bool = False,
    **options: Any,
) -> Dict[str, Any]:
    r"""Run one subcommand and write ``run_summary_<subcommand>.json`` in the output directory,
    next to the enhanced file for ``enhance``.

    Args:
        subcommand (str): one of the registered subcommands or ``'enhance'``.
        config_path (Optional[str]): YAML config, defaults only when omitted.
        overrides (Sequence[str]): ``dotted.key=value`` overrides.
        out_dir (Optional[str]): output directory, replaces ``out_dir`` of the config.
        seed (Optional[int]): run seed.
        verbose (bool): show progress bars.
        **options: ``input``, ``output`` and ``ckpt`` of ``enhance``.

    Raises:
        ConfigError: on invalid configs and missing prerequisite artifacts.

    Returns:
        Dict[str, Any]: the run summary.
    """
    config = load_config(config_path, overrides, seed=seed, out_dir=out_dir)
    paths = RunPaths(Path(config.out_dir))

    if subcommand == "enhance":
        output = Path(options["output"])
        metrics = enhance_file(config, Path(options["input"]), output, Path(options["ckpt"]))
        # the summary goes next to the enhanced file, out_dir is left untouched
        summary_dir = output.parent
    elif subcommand in SUBCOMMANDS:
        paths.root.mkdir(parents=True, exist_ok=True)
        metrics = SUBCOMMANDS[subcommand](config, paths, verbose=verbose)
        save_config(config, paths.root / "config.yaml")
        summary_dir = paths.root
    else:
        raise ConfigError(f"unknown subcommand '{subcommand}'.")

    summary = {
        "subcommand": subcommand,
        "config_hash": config_hash(config),
        "git_describe": git_describe(),
        "config": config_to_dict(config),
        "metrics": metrics,
    }
    summary_path = summary_dir / f"run_summary_{subcommand.replace('-', '_')}.json"
    write_run_summary(summary_path, summary)
    logger.info(f"Wrote {summary_path}")
    return summary


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(sys.stderr, level=args.log_level)

    options = {}
    out_dir = getattr(args, "out", None)
    if args.subcommand == "enhance":
        options = {"input": args.input, "output": args.output, "ckpt": args.ckpt}

    try:
        summary = run(
            args.subcommand,
            args.config,
            args.overrides,
            out_dir=out_dir,
            seed=args.seed,
            verbose=args.verbose,
            **options,
        )
    except ConfigError as e:
        print(f"ssl-mse: error: {e}", file=sys.stderr)
        return 2
    except (
        CheckpointError,
        FrozenParameterError,
        NonFiniteLossError,
        FileNotFoundError,
        ValueError,
    ) as e:
        print(f"ssl-mse: error: {e}", file=sys.stderr)
        return 1

    return 0 if summary["metrics"].get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
