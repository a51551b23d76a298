# packages/ptebd/cli.py
"""
Command line entry point:

    python -m packages.ptebd run memory-vs-redfield-weak --out-dir runs/weak
    python -m packages.ptebd run my_config.json --verify
    python -m packages.ptebd sweep memory-scan --workers 4
    python -m packages.ptebd presets list
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__, settings
from .config import ExperimentConfig, load_config
from .errors import ConfigurationError, PtebdError
from .presets import ALIASES, preset_config, preset_document, preset_names
from .runner import run_experiment, run_sweep

logger = logging.getLogger("ptebd.cli")


def resolve_config(source: str) -> ExperimentConfig:
    """A path to a JSON config, or the name of a built-in preset."""
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        return load_config(path)
    return preset_config(source)


def _out_dir(args: argparse.Namespace, cfg: ExperimentConfig) -> Path:
    if args.out_dir:
        return Path(args.out_dir)
    if cfg.output.directory:
        return Path(cfg.output.directory)
    return Path(settings.OUT_DIR) / cfg.name


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    if cfg.sweep:
        raise ConfigurationError(f"{cfg.name} declares sweep axes; use the sweep command")
    out = _out_dir(args, cfg)
    result = run_experiment(cfg, out, verify=args.verify)
    print(f"{cfg.name}: {len(result.panels)} panel(s), {len(result.files)} file(s) in {out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve_config(args.config)
    out = _out_dir(args, cfg)
    columns = run_sweep(cfg, out, workers=args.workers)
    n_rows = len(next(iter(columns.values()))) if columns else 0
    print(f"{cfg.name}: {n_rows} sweep point(s) written to {out / 'sweep.csv'}")
    return 0


def _cmd_presets(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in preset_names():
            print(f"{name:18s} {preset_config(name).description}")
        for alias, name in ALIASES.items():
            print(f"{alias:18s} alias of {name}")
        return 0
    if not args.name:
        raise ConfigurationError("presets show needs a preset name")
    print(json.dumps(preset_document(args.name), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptebd", description="PT-TEBD open-system experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a config file or preset")
    run.add_argument("config", help="path to a JSON config or a preset name")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--verify", action="store_true", help="cross-check against path summation (<= 2 sites)")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run every grid point of a config's sweep axes")
    sweep.add_argument("config", help="path to a JSON config or a preset name")
    sweep.add_argument("--out-dir", default=None)
    sweep.add_argument("--workers", type=int, default=settings.WORKERS)
    sweep.set_defaults(func=_cmd_sweep)

    presets = sub.add_parser("presets", help="list or show built-in presets")
    presets.add_argument("action", choices=["list", "show"])
    presets.add_argument("name", nargs="?")
    presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PtebdError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
