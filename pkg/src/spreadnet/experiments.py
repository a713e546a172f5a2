"""Experiment runners behind the command-line interface.

Each runner takes an :class:`ExperimentConfig` and returns an
:class:`Outcome` holding the CSV table, an overlay plot and the summary
statistics.  Nothing here touches the file system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytic
from .config import ExperimentConfig, SweepSpec
from .errors import ConfigError, NoCrossingError
from .graphgen import (Family, cycle_counts_all, expected_cycles_dreg, expected_cycles_er)
from .network import SpreadParams, uniform_grid
from .sim import ensemble, format_csv
from .svg import Plot


@dataclass
class Outcome:
    header: list
    columns: list
    plot: Optional[Plot] = None
    deviation: Optional[float] = None
    allowed: Optional[float] = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> Optional[bool]:
        if self.deviation is None or self.allowed is None:
            return None
        return bool(self.deviation <= self.allowed)

    def csv(self) -> str:
        return format_csv(self.header, self.columns)


def grid_of(cfg: ExperimentConfig) -> np.ndarray:
    return uniform_grid(cfg.horizon, cfg.grid)


def exact_curve(family: Family, params: SpreadParams, grid) -> tuple[np.ndarray, str]:
    """Exact (infinite-network) adoption curve matching a family, with its label."""
    k, a = family.kind, family.args
    if k == "er":
        return analytic.solve_er(params, a[1], grid).trajectory.values, f"exact ER, lambda={a[1]:g}"
    if k == "dreg":
        return analytic.solve_dreg(params, a[1], grid).trajectory.values, f"exact {a[1]}-regular"
    if k == "isolated":
        return analytic.f_isolated(grid, params.p, params.i0), "isolated nodes"
    if k == "cycle" or (k == "torus" and a[0] == 1):
        return analytic.f_1d(grid, params), "exact 1D"
    if k == "complete":
        return analytic.f_compartmental(params, grid).values, "compartmental limit"
    raise ConfigError(f"no exact curve for {family}; use kind 'lattice' for tori with D > 1")


def _sub_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, np.uint64)[0] >> 1)


def _ensemble(cfg: ExperimentConfig, family: Family, seed: int):
    return ensemble(family, cfg.params, cfg.runs, grid_of(cfg), horizon=cfg.horizon,
                    resample_graph=cfg.resample_graph and family.is_random,
                    master_seed=seed, workers=cfg.workers)


def run_simulate(cfg: ExperimentConfig) -> Outcome:
    res = _ensemble(cfg, cfg.family, cfg.seed)
    g = res.grid
    plot = Plot(title=f"{cfg.name}: {cfg.family}").add("simulation", g.times, g.values, "dash", 2 * g.stderr)
    return Outcome(["t", "mean", "stderr"], [g.times, g.values, g.stderr], plot)


def run_analytic(cfg: ExperimentConfig) -> Outcome:
    grid = grid_of(cfg)
    f, label = exact_curve(cfg.family, cfg.params, grid)
    return Outcome(["t", "f"], [grid, f], Plot(title=f"{cfg.name}: {cfg.family}").add(label, grid, f))


def run_compare(cfg: ExperimentConfig) -> Outcome:
    grid = grid_of(cfg)
    exact, label = exact_curve(cfg.family, cfg.params, grid)
    res = _ensemble(cfg, cfg.family, cfg.seed).grid
    dev = float(np.max(np.abs(res.values - exact)))
    allowed = max(cfg.tolerance or 0.0, cfg.stderr_factor * float(np.max(res.stderr)))
    plot = (Plot(title=f"{cfg.name}: {cfg.family}, {cfg.runs} runs")
            .add(f"simulation mean +/- 2 se", grid, res.values, "dash", 2 * res.stderr)
            .add(label, grid, exact))
    return Outcome(["t", "sim_mean", "sim_stderr", "exact"], [grid, res.values, res.stderr, exact],
                   plot, dev, allowed, {"max_stderr": float(np.max(res.stderr))})


def run_lattice(cfg: ExperimentConfig) -> Outcome:
    """Torus of dimension D against random 2D-regular graphs of the same size."""
    if cfg.family.kind != "torus":
        raise ConfigError("kind lattice needs a torus family")
    D, side = cfg.family.args
    M = side ** D
    grid = grid_of(cfg)
    torus = _ensemble(cfg, cfg.family, cfg.seed).grid
    regular = _ensemble(cfg, Family("dreg", (M, 2 * D)), _sub_seed(cfg.seed, 1)).grid
    exact = analytic.solve_dreg(cfg.params, 2 * D, grid).trajectory.values
    se = np.sqrt(torus.stderr ** 2 + regular.stderr ** 2)
    diff = regular.values - torus.values
    if D == 1:
        # the two structures coincide: two-sided check
        dev = float(np.max(np.abs(diff) - 4 * se))
    else:
        # random regular spreads at least as fast: one-sided check
        dev = float(np.max(-diff - 2 * se))
    plot = (Plot(title=f"{cfg.name}: torus D={D} vs {2 * D}-regular, {cfg.runs} runs")
            .add(f"torus D={D}", grid, torus.values, "dashdot", 2 * torus.stderr)
            .add(f"random {2 * D}-regular", grid, regular.values, "solid", 2 * regular.stderr)
            .add(f"exact {2 * D}-regular", grid, exact, "dot"))
    return Outcome(["t", "torus_mean", "torus_stderr", "dreg_mean", "dreg_stderr", "dreg_exact"],
                   [grid, torus.values, torus.stderr, regular.values, regular.stderr, exact],
                   plot, max(0.0, dev), cfg.tolerance or 0.0,
                   {"max_abs_difference": float(np.max(np.abs(diff))),
                    "min_difference_over_se": float(np.min(np.where(se > 0, diff / np.where(se > 0, se, 1), 0)))})


def run_curves(cfg: ExperimentConfig) -> Outcome:
    """Exact d-regular curves for several d, against the compartmental limit."""
    grid = grid_of(cfg)
    plot = Plot(title=f"{cfg.name}: d-regular curves")
    header, cols = ["t"], [grid]
    styles = ["dashdot", "solid", "dot", "dash"]
    for i, d in enumerate(cfg.degrees):
        f = analytic.solve_dreg(cfg.params, d, grid).trajectory.values
        header.append(f"d{d}")
        cols.append(f)
        plot.add(f"d={d}", grid, f, styles[i % len(styles)])
    compart = analytic.f_compartmental(cfg.params, grid).values
    header.append("compart")
    cols.append(compart)
    plot.add("compartmental", grid, compart)
    dev = float(np.max(np.abs(cols[-2] - compart)))
    return Outcome(header, cols, plot, dev, cfg.tolerance,
                   {"largest_d": max(cfg.degrees)})


def _lambda_of(family: Family) -> Optional[float]:
    return float(family.args[1]) if family.kind in ("er",) else None


def sweep_metric(family: Family, params: SpreadParams, spec: SweepSpec, value) -> float:
    """Value of ``spec.metric`` with ``spec.param`` set to ``value``."""
    lam = _lambda_of(family)
    d = int(family.args[1]) if family.kind == "dreg" else None
    p, q, i0 = params.p, params.q, params.i0
    if spec.param == "lambda":
        if family.kind != "er":
            raise ConfigError("sweeping lambda needs an ER family")
        lam = float(value)
    elif spec.param == "d":
        if family.kind != "dreg":
            raise ConfigError("sweeping d needs a dreg family")
        d = int(value)
    else:
        p, q, i0 = {"p": (value, q, i0), "q": (p, value, i0), "i0": (p, q, value)}[spec.param]
    solver = {"er": "er", "dreg": "dreg", "complete": "compart", "isolated": "isolated"}.get(family.kind)
    if solver is None:
        raise ConfigError(f"sweeps are not defined for the {family.kind} family")

    if spec.metric == "f_infinity":
        if solver != "er":
            raise ConfigError("f_infinity is defined for the ER family")
        if p > 0:
            return 1.0
        return float(i0) if lam == 0 else analytic.final_infection_level(lam, i0)
    if lam == 0:
        # no edges: every node is isolated
        solver = "isolated"
    sp = SpreadParams(float(p), float(q), float(i0))
    if spec.metric == "half_life":
        try:
            return analytic.half_life(solver, sp, lam=lam, d=d)
        except NoCrossingError:
            return math.nan
    grid = np.array([0.0, spec.t])
    if solver == "er":
        return float(analytic.solve_er(sp, lam, grid).trajectory.values[-1])
    if solver == "dreg":
        return float(analytic.solve_dreg(sp, d, grid).trajectory.values[-1])
    if solver == "compart":
        return float(analytic.f_compartmental(sp, grid).values[-1])
    return float(analytic.f_isolated(spec.t, sp.p, sp.i0))


def run_sweep(cfg: ExperimentConfig) -> Outcome:
    spec = cfg.sweep
    xs = spec.values()
    ys = np.array([sweep_metric(cfg.family, cfg.params, spec, x) for x in xs])
    plot = Plot(title=f"{cfg.name}: {spec.metric} vs {spec.param}", xlabel=spec.param, ylabel=spec.metric)
    plot.add(spec.metric, xs, ys)
    ok = ys[np.isfinite(ys)]
    diffs = np.diff(ok)
    trend = "decreasing" if np.all(diffs < 0) else "increasing" if np.all(diffs > 0) else "not monotone"
    return Outcome([spec.param, spec.metric], [xs, ys], plot, None, None, {"trend": trend})


def run_fixed_point(cfg: ExperimentConfig) -> Outcome:
    """Final SI level against lambda, overlaid with the giant component."""
    spec = cfg.sweep
    if spec.param != "lambda" or spec.metric != "f_infinity":
        raise ConfigError("kind fixed_point sweeps lambda with metric f_infinity")
    lams = spec.values()
    f_inf = np.array([sweep_metric(cfg.family, cfg.params, spec, x) for x in lams])
    gc = np.array([analytic.giant_component(x) for x in lams])
    h = lams[1] - lams[0]
    second = np.abs(np.diff(f_inf, 2)) / h ** 2
    plot = (Plot(title=f"{cfg.name}: final infection level, i0={cfg.params.i0:g}",
                 xlabel="lambda", ylabel="f_infinity")
            .add("f_infinity", lams, f_inf).add("giant component", lams, gc, "dash"))
    return Outcome(["lambda", "f_infinity", "giant_component"], [lams, f_inf, gc], plot,
                   float(np.max(np.abs(f_inf - gc))), cfg.tolerance,
                   {"max_second_difference": float(second.max())})


RUNNERS = {
    "compare": run_compare,
    "lattice": run_lattice,
    "curves": run_curves,
    "sweep": run_sweep,
    "fixed_point": run_fixed_point,
}


def run(cfg: ExperimentConfig) -> Outcome:
    return RUNNERS[cfg.kind](cfg)


# --------------------------------------------------------------- cycle census


def cycle_table(family: Family, lengths, runs: int, seed: int = 0, degree: Optional[int] = None) -> Outcome:
    """Mean number of L-cycles through a node over ``runs`` sampled graphs.

    For ER families ``degree`` restricts the average to nodes of that degree;
    without it the average runs over all nodes, whose expectation is
    ``lambda^L / (2M)``.  Standard errors are between graphs.
    """
    lengths = list(lengths)
    if family.kind not in ("er", "dreg"):
        raise ConfigError("cycle tables are defined for er and dreg families")
    M = family.node_count
    per_graph = np.full((runs, len(lengths)), np.nan)
    for r in range(runs):
        g = family.generate(_sub_seed(seed, r))
        counts = cycle_counts_all(g, max(lengths))
        nodes = np.ones(M, bool) if degree is None else g.degrees == degree
        if nodes.any():
            per_graph[r] = counts[nodes][:, lengths].mean(axis=0)
    valid = per_graph[~np.isnan(per_graph[:, 0])]
    mean = valid.mean(axis=0)
    se = valid.std(axis=0, ddof=1) / np.sqrt(len(valid)) if len(valid) > 1 else np.zeros(len(lengths))
    if family.kind == "dreg":
        d = int(family.args[1])
        expected = np.array([expected_cycles_dreg(d, L, M) for L in lengths])
    elif degree is None:
        lam = float(family.args[1])
        expected = np.array([lam ** L / (2 * M) for L in lengths])
    else:
        expected = np.array([expected_cycles_er(degree, float(family.args[1]), L, M) for L in lengths])
    L = np.array(lengths, dtype=float)
    z = np.where(se > 0, (mean - expected) / np.where(se > 0, se, 1), 0.0)
    plot = (Plot(title=f"cycles through a node, {family}", xlabel="L", ylabel="mean count")
            .add("empirical", L, mean, "dash", 2 * se).add("expected", L, expected))
    return Outcome(["L", "mean", "stderr", "expected"], [L, mean, se, expected], plot,
                   float(np.max(np.abs(z))), 3.0, {"graphs": int(len(valid))})
