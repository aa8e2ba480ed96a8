"""Command-line entry point: ``run``, ``compare`` and ``export-deployment``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .curves import CcdfCurve, compare_curves
from .geometry import RadioConfig, area_side_for, export_deployment
from .harness import MODELS, ExperimentConfig, _deployment_for, run_experiment

# flags that also accept the short names used in the usage line
_ALIASES = {"densities": ["--density"], "csts": ["--cst"], "output_dir": ["--out"]}
_LISTS = {"densities", "csts"}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    for f in fields(ExperimentConfig):
        names = [f"--{f.name}"]
        if "_" in f.name:
            names.append(f"--{f.name.replace('_', '-')}")
        names += _ALIASES.get(f.name, [])
        kw = {"dest": f.name, "default": None}
        if f.name in _LISTS:
            kw.update(type=float, nargs="+")
        elif f.name == "model":
            kw.update(choices=MODELS)
        elif f.type in ("int", int):
            kw.update(type=int)
        elif f.type in ("float", float):
            kw.update(type=float)
        p.add_argument(*names, **kw)
    p.add_argument("--grid", type=int, default=None,
                   help="points on both the SINR and the throughput grid")
    p.add_argument("--config", default=None, help="flat JSON file; flags override its values")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csmabench", description="CSMA network capacity estimators")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="compute SINR and throughput CCDFs for one model")
    _add_config_flags(run)

    cmp_ = sub.add_parser("compare", help="max vertical CCDF distance in percentage points")
    cmp_.add_argument("--a", required=True)
    cmp_.add_argument("--b", required=True)

    exp = sub.add_parser("export-deployment", help="write nodes.csv and pathloss.csv for one realization")
    exp.add_argument("--density", type=float, required=True, help="APs per km^2")
    exp.add_argument("--seed", type=int, required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--cst", type=float, default=-82.0)
    exp.add_argument("--area_km2", "--area-km2", type=float, default=0.05)
    return ap


def _config_from_args(args) -> ExperimentConfig:
    over = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig)}
    if args.grid is not None:
        over["sinr_points"] = over["sinr_points"] or args.grid
        over["throughput_points"] = over["throughput_points"] or args.grid
    for k in _LISTS:
        if over[k] is not None:
            over[k] = tuple(over[k])
    if args.config:
        return ExperimentConfig.from_file(args.config, **over)
    return ExperimentConfig(**{k: v for k, v in over.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = _config_from_args(args)
            res = run_experiment(cfg)
            for p in res.files:
                print(p)
        elif args.command == "compare":
            pp = compare_curves(CcdfCurve.from_csv(args.a), CcdfCurve.from_csv(args.b))
            print(f"{pp:.4f}")
        else:
            radio = RadioConfig().with_cst(args.cst)
            dep, _ = _deployment_for(args.density, area_side_for(args.area_km2), args.seed, radio)
            for p in export_deployment(dep, args.out):
                print(p)
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
