"""Command line entry point: ``pwlab run``, ``pwlab list`` and ``pwlab frame-check``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigInvalid, ExperimentFailed, IoFailure, PwlabError
from .harness import ExperimentConfig, list_experiments, run

EXIT_PASS = 0
EXIT_IO = 1
EXIT_FAILED = 2
EXIT_CONFIG = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwlab", description="Paley-Wiener sampling experiments")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("config", type=Path)
    r.add_argument("--output", type=Path, help="override the config's output directory")
    r.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    ls = sub.add_parser("list", help="list experiments and their parameters")
    ls.add_argument("--json", action="store_true")

    fc = sub.add_parser("frame-check", help="check the recovery conditions of a measurement design")
    fc.add_argument("--k", type=int, default=2, choices=(2, 3))
    fc.add_argument("--mode", choices=("explicit", "orbit"))
    fc.add_argument("--output", type=Path, default=Path("out/frame-check"))
    return p


def _load(path: Path, output: Path | None) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    cfg = ExperimentConfig.from_json(text)
    if output is not None:
        cfg = ExperimentConfig(cfg.experiment, cfg.params, cfg.seed, str(output))
    return cfg


def _execute(cfg: ExperimentConfig, figures: bool) -> int:
    manifest = run(cfg, figures=figures)
    summary = Path(cfg.output_dir) / "summary.json"
    print(summary.read_text(), end="")
    if manifest.passed is False:
        return EXIT_FAILED
    return EXIT_PASS


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list":
            catalog = list_experiments()
            if args.json:
                print(json.dumps(catalog, indent=2, sort_keys=True))
            else:
                for item in catalog:
                    params = ", ".join(f"{k}={v!r}" for k, v in item["parameters"].items())
                    print(f"{item['name']:<12} {item['anchor']}\n{'':<12} {params}")
            return EXIT_PASS
        if args.command == "frame-check":
            params = {"K": args.k} if args.mode is None else {"K": args.k, "mode": args.mode}
            return _execute(ExperimentConfig("frame-check", params, 0, str(args.output)), False)
        return _execute(_load(args.config, args.output), not args.no_figures)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoFailure, ExperimentFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PwlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
