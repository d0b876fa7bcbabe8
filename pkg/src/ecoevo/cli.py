"""Command-line entry point ``ecoevo``.

``ecoevo <mode> --config PATH --seed U64 [--threads N] [--out DIR]`` runs
an experiment; ``ecoevo check-iif --config PATH --grid N`` prints the
invasion-implies-fixation classification over a trait grid;
``ecoevo plot-data RUN_DIR FIGURE`` writes the tidy table behind a figure.

Exit codes: 0 success, 2 configuration error, 3 every replicate failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import FIGURES, MODES, ConfigError, MissingSeries, emit_plot_data, iif_grid, parse_config, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 2, 3
_SYMBOL = {"mutant-dies": "-", "fixation-replaces": "+", "degenerate": "0"}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecoevo", description="Eco-evolutionary simulation with a neutral marker.")
    sub = p.add_subparsers(dest="command", required=True)
    for mode in MODES:
        s = sub.add_parser(mode)
        s.add_argument("--config", required=True, type=Path)
        if mode == "check-iif":
            s.add_argument("--grid", type=int, default=21)
            s.add_argument("--out", type=Path)
        else:
            s.add_argument("--seed", type=int)
            s.add_argument("--threads", type=int)
            s.add_argument("--out", type=Path)
    s = sub.add_parser("plot-data")
    s.add_argument("run_dir", type=Path)
    s.add_argument("figure", choices=FIGURES)
    return p


def _load(path: Path, mode: str, overrides: dict) -> dict:
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc["mode"] = mode
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return doc


def _check_iif(args) -> int:
    cfg = parse_config(_load(args.config, "check-iif", {}))
    spec = cfg.build_model()
    rows = iif_grid(spec, args.grid)
    xs = sorted({r[0] for r in rows})
    table = {(x, y): c for x, y, c in rows}
    print("resident x \\ mutant y   (+ fixation-replaces, - mutant-dies, 0 degenerate)")
    for x in xs:
        print(f"{x:+.3f} " + "".join(_SYMBOL[table[(x, y)]] for y in xs))
    if args.out is not None:
        cfg.output_dir = str(args.out)
        cfg.params = {**cfg.params, "grid": args.grid}
        run_experiment(cfg)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "plot-data":
            print(emit_plot_data(args.run_dir, args.figure))
            return EXIT_OK
        if args.command == "check-iif":
            return _check_iif(args)
        overrides = {"seed": args.seed, "threads": args.threads}
        if args.out is not None:
            overrides["output_dir"] = str(args.out)
        cfg = parse_config(_load(args.config, args.command, overrides))
        manifest = run_experiment(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingSeries as e:
        print(f"missing series: {e}", file=sys.stderr)
        return EXIT_FAILED
    print(f"{cfg.mode}: {len(manifest.replicates)} replicate(s), {len(manifest.files)} file(s) in {cfg.output_dir}")
    if manifest.all_failed:
        print("every replicate failed; see manifest.json", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
