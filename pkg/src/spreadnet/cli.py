"""Command-line entry point: ``spreadnet <command> [options]``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from . import experiments
from .config import ExperimentConfig, SweepSpec, load_config, load_preset, preset_names
from .errors import SpreadNetError
from .graphgen import Family
from .network import SpreadParams


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split("..")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START..STOP, got {text!r}") from None


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", metavar="PATH", help="experiment config file (YAML)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--runs", type=int, help="number of replicates")
    p.add_argument("--tolerance", type=float, help="absolute sup-norm tolerance")
    p.add_argument("--workers", type=int, help="threads for ensemble replicates")
    p.add_argument("--no-svg", action="store_true", help="skip the SVG plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spreadnet", description="Bass/SI spreading on networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure", help="reproduce a figure panel from its shipped preset")
    p.add_argument("id", help="panel id, e.g. fig1b (see 'spreadnet figure list')")
    _common(p, config=False)

    for name, text in [("simulate", "ensemble mean of the simulation"),
                       ("analytic", "exact curve for the configured family"),
                       ("compare", "simulation against the exact curve")]:
        p = sub.add_parser(name, help=text)
        _common(p)

    p = sub.add_parser("cycles", help="mean cycle counts through a node")
    p.add_argument("--family", required=True, help="e.g. 'dreg(1000, 3)' or 'er(1000, 3)'")
    p.add_argument("--lengths", type=_range, default=(3, 6), help="cycle lengths START..STOP")
    p.add_argument("--degree", type=int, help="ER only: restrict to nodes of this degree")
    _common(p, config=False)

    p = sub.add_parser("sweep", help="scalar metric as a function of one parameter")
    p.add_argument("--param", choices=["lambda", "d", "p", "q", "i0"])
    p.add_argument("--range", dest="span", type=_range, help="START..STOP")
    p.add_argument("--points", type=int)
    p.add_argument("--metric", choices=["half_life", "f_infinity", "f_at_t"])
    p.add_argument("--t", type=float, help="time for metric f_at_t")
    p.add_argument("--family", help="family when no config is given (default er(2000, 1))")
    p.add_argument("--p", type=float, default=0.001)
    p.add_argument("--q", type=float, default=0.05)
    p.add_argument("--i0", type=float, default=0.0)
    _common(p)
    return parser


def _with_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    return cfg.replace(seed=args.seed, out=args.out, runs=args.runs, tolerance=args.tolerance,
                       workers=args.workers)


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise SpreadNetError(f"{args.command} needs --config PATH")
    return _with_overrides(load_config(args.config), args)


def _write(name: str, out_dir: str, outcome: experiments.Outcome, cfg_seed: int, runs: Optional[int],
           command: str, elapsed: float, svg: bool) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(outcome.csv())
    if svg and outcome.plot is not None:
        (out / f"{name}.svg").write_text(outcome.plot.render())
    lines = [f"name: {name}", f"command: {command}", f"seed: {cfg_seed}"]
    if runs is not None:
        lines.append(f"runs: {runs}")
    if outcome.deviation is not None:
        lines.append(f"sup_norm_deviation: {outcome.deviation:.6g}")
    if outcome.allowed is not None:
        lines.append(f"tolerance: {outcome.allowed:.6g}")
    status = {True: "pass", False: "fail", None: "n/a"}[outcome.passed]
    lines.append(f"status: {status}")
    for k, v in outcome.notes.items():
        lines.append(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    lines.append(f"runtime_s: {elapsed:.2f}")
    (out / f"{name}.summary.txt").write_text("\n".join(lines) + "\n")
    return out


def _sweep_config(args) -> ExperimentConfig:
    if args.config:
        cfg = _require_config(args)
        if cfg.sweep is None and not (args.param and args.span and args.metric):
            raise SpreadNetError("the config has no sweep section; give --param, --range and --metric")
    else:
        family = Family.parse(args.family or "er(2000, 1)")
        cfg = ExperimentConfig(name="sweep", family=family, params=SpreadParams(args.p, args.q, args.i0),
                               kind="sweep")
        cfg = _with_overrides(cfg, args)
    base = cfg.sweep
    if base is None and not (args.param and args.span and args.metric):
        raise SpreadNetError("sweep needs --param, --range and --metric")
    span = args.span or (base.start, base.stop)
    spec = SweepSpec(args.param or base.param, span[0], span[1],
                     args.points or (base.points if base else 32),
                     args.metric or base.metric, args.t if args.t is not None else (base.t if base else None))
    if spec.metric == "f_at_t" and spec.t is None:
        raise SpreadNetError("metric f_at_t needs --t")
    return cfg.replace(kind="sweep", sweep=spec)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "figure":
            if args.id == "list":
                print("\n".join(preset_names()))
                return 0
            cfg = _with_overrides(load_preset(args.id), args)
            outcome = experiments.run(cfg)
            name, runs = cfg.name, cfg.runs if cfg.kind in ("compare", "lattice") else None
            seed, out = cfg.seed, cfg.out
        elif args.command == "cycles":
            family = Family.parse(args.family)
            family.validate()
            lo, hi = args.lengths
            runs = args.runs or 20
            seed = args.seed or 0
            outcome = experiments.cycle_table(family, range(int(lo), int(hi) + 1), runs, seed, args.degree)
            name, out = "cycles", args.out or "."
        elif args.command == "sweep":
            cfg = _sweep_config(args)
            outcome = experiments.run_sweep(cfg)
            name, runs, seed, out = cfg.name, None, cfg.seed, cfg.out
        else:
            cfg = _require_config(args)
            if args.command == "simulate":
                outcome = experiments.run_simulate(cfg)
            elif args.command == "analytic":
                outcome = experiments.run_analytic(cfg)
            else:
                outcome = experiments.run(cfg if cfg.kind != "sweep" else cfg.replace(kind="compare"))
            name, runs, seed, out = cfg.name, cfg.runs, cfg.seed, cfg.out
    except SpreadNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    path = _write(name, out, outcome, seed, runs, args.command, elapsed, not args.no_svg)
    verdict = {True: "PASS", False: "FAIL", None: "done"}[outcome.passed]
    dev = "" if outcome.deviation is None else f" deviation={outcome.deviation:.4g}"
    tol = "" if outcome.allowed is None else f" tolerance={outcome.allowed:.4g}"
    print(f"{name}: {verdict}{dev}{tol} -> {path / (name + '.csv')}")
    return 1 if outcome.passed is False else 0


if __name__ == "__main__":
    sys.exit(main())
