"""Event-driven Monte Carlo simulation of the Bass/SI process and ensemble statistics.

A susceptible node j adopts at rate ``p + w * (number of adopted neighbors)``.
Between adoptions every rate is constant, so the Gillespie direct method is
exact: draw an exponential waiting time from the total hazard, pick the
adopter proportionally to its hazard, then update the hazards of its
neighbors only.  Hazards live in a binary sum tree so both the draw and the
update cost O(log M).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from .errors import ParameterError
from .graphgen import Family
from .network import Graph, NetworkInstance, SpreadParams, Trajectory, check_grid, uniform_grid


@numba.njit(cache=True, nogil=True)
def _tree_set(tree, size, j, value):
    i = size + j
    tree[i] = value
    i //= 2
    while i >= 1:
        tree[i] = tree[2 * i] + tree[2 * i + 1]
        i //= 2


@numba.njit(cache=True, nogil=True)
def _gillespie(indptr, indices, p, w, init_prob, horizon, rng, out):
    M = indptr.size - 1
    size = 1
    while size < M:
        size *= 2
    tree = np.zeros(2 * size)
    pressure = np.zeros(M, dtype=np.int64)
    adopted = np.zeros(M, dtype=np.bool_)
    for j in range(M):
        out[j] = np.inf
        if rng.random() < init_prob[j]:
            adopted[j] = True
            out[j] = 0.0
    for j in range(M):
        if adopted[j]:
            for e in range(indptr[j], indptr[j + 1]):
                pressure[indices[e]] += 1
    for j in range(M):
        if not adopted[j]:
            tree[size + j] = p + w * pressure[j]
    for i in range(size - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]

    t = 0.0
    while True:
        total = tree[1]
        if total <= 0.0:
            break
        t += rng.exponential(1.0) / total
        if t > horizon:
            break
        # descend; redraw the position if rounding lands on an empty leaf
        while True:
            u = rng.random() * total
            i = 1
            while i < size:
                left = tree[2 * i]
                if u < left:
                    i = 2 * i
                else:
                    u -= left
                    i = 2 * i + 1
            if tree[i] > 0.0:
                break
        j = i - size
        adopted[j] = True
        out[j] = t
        _tree_set(tree, size, j, 0.0)
        for e in range(indptr[j], indptr[j + 1]):
            k = indices[e]
            pressure[k] += 1
            if not adopted[k]:
                _tree_set(tree, size, k, p + w * pressure[k])


@numba.njit(cache=True, nogil=True)
def _gillespie_batch(indptr, indices, p, w, init_prob, horizon, rng, runs):
    M = indptr.size - 1
    out = np.empty((runs, M))
    for r in range(runs):
        _gillespie(indptr, indices, p, w, init_prob, horizon, rng, out[r])
    return out


def _init_prob(instance: NetworkInstance, initial) -> np.ndarray:
    if initial is None:
        return np.full(instance.node_count, float(instance.i0))
    a = np.asarray(initial, dtype=float)
    if a.shape != (instance.node_count,) or np.any(a < 0) or np.any(a > 1):
        raise ParameterError("initial must hold one probability in [0, 1] per node")
    return a


@dataclass(frozen=True, eq=False)
class RunResult:
    """Adoption time of every node (``inf`` if it never adopted within the horizon)."""

    adoption_times: np.ndarray
    initial_adopters: frozenset

    def fraction(self, grid) -> np.ndarray:
        """Fraction of nodes adopted by each grid time."""
        return adoption_fraction(self.adoption_times, grid)


def adoption_fraction(adoption_times: np.ndarray, grid) -> np.ndarray:
    s = np.sort(adoption_times)
    return np.searchsorted(s, np.asarray(grid, dtype=float), side="right") / s.size


def simulate(instance: NetworkInstance, horizon: float, seed=None, initial=None) -> RunResult:
    """One exact realization of the process up to ``horizon``.

    Initial adopters are independent Bernoulli(i0) draws, or per-node
    probabilities from ``initial``.
    """
    if not horizon > 0:
        raise ParameterError("horizon must be > 0")
    rng = np.random.default_rng(seed)
    g = instance.graph
    out = np.empty(g.node_count)
    _gillespie(g.indptr, g.indices, float(instance.node_weight), float(instance.edge_weight),
               _init_prob(instance, initial), float(horizon), rng, out)
    out.setflags(write=False)
    return RunResult(out, frozenset(np.flatnonzero(out == 0.0).tolist()))


def simulate_many(instance: NetworkInstance, horizon: float, runs: int, seed=None,
                  initial=None) -> np.ndarray:
    """Adoption times of ``runs`` independent realizations, shape ``(runs, M)``."""
    if runs < 1:
        raise ParameterError("runs must be >= 1")
    rng = np.random.default_rng(seed)
    g = instance.graph
    return _gillespie_batch(g.indptr, g.indices, float(instance.node_weight),
                            float(instance.edge_weight), _init_prob(instance, initial),
                            float(horizon), rng, int(runs))


def empirical_susceptibility(times: np.ndarray, grid) -> tuple[np.ndarray, np.ndarray]:
    """Per-node fraction of runs still susceptible at each grid time, with standard errors.

    ``times`` is the ``(runs, M)`` output of :func:`simulate_many`; the result
    arrays have shape ``(M, len(grid))``.
    """
    grid = np.asarray(grid, dtype=float)
    s = (times[:, :, None] > grid[None, None, :]).mean(axis=0)
    se = np.sqrt(s * (1 - s) / times.shape[0])
    return s, se


# ------------------------------------------------------------------ ensembles


def replicate_seeds(master_seed: int, replicate: int) -> tuple[int, int]:
    """(graph seed, run seed) for one replicate; depends only on the pair of inputs."""
    state = np.random.SeedSequence([int(master_seed), int(replicate)]).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


def fixed_graph_seed(master_seed: int) -> int:
    return int(np.random.SeedSequence([int(master_seed)]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Mean adoption fraction over replicates, optionally stratified by degree.

    ``by_degree`` maps a degree to the pooled fraction of still-susceptible
    nodes of that degree; ``degree_counts`` is the number of node
    observations behind each stratum.
    """

    grid: Trajectory
    runs: int
    by_degree: Optional[dict] = None
    degree_counts: Optional[dict] = None

    def to_csv(self) -> str:
        header = ["t", "mean", "stderr"]
        cols = [self.grid.times, self.grid.values, self.grid.stderr]
        if self.by_degree:
            for d in sorted(self.by_degree):
                header.append(f"S_d{d}")
                cols.append(self.by_degree[d].values)
        return format_csv(header, cols)


def format_csv(header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    rows = [",".join(header)]
    for vals in zip(*columns):
        rows.append(",".join(f"{float(v):.10g}" for v in vals))
    return "\n".join(rows) + "\n"


def _replicate(family: Family, params: SpreadParams, horizon: float, grid: np.ndarray,
               master_seed: int, r: int, resample_graph: bool, fixed: Optional[Graph],
               by_degree: bool):
    graph_seed, run_seed = replicate_seeds(master_seed, r)
    graph = family.generate(graph_seed) if resample_graph else fixed
    run = simulate(family.instance(graph, params), horizon, run_seed)
    frac = run.fraction(grid)
    if not by_degree:
        return frac, None
    deg = graph.degrees
    strata = {}
    for d in np.unique(deg):
        t = run.adoption_times[deg == d]
        susceptible = t.size - np.searchsorted(np.sort(t), grid, side="right")
        strata[int(d)] = (susceptible.astype(float), t.size)
    return frac, strata


def ensemble(family: Family, params: SpreadParams, runs: int, grid=None, *,
             horizon: Optional[float] = None, resample_graph: bool = True,
             master_seed: int = 0, by_degree: bool = False, workers: int = 1) -> EnsembleResult:
    """Average the adoption fraction over ``runs`` independent replicates.

    With ``resample_graph`` every replicate draws a fresh graph from the
    family (estimating the graph-ensemble mean); otherwise all replicates
    share one graph.  Replicate r is seeded from ``(master_seed, r)`` and the
    reduction is done in replicate order, so the result does not depend on
    ``workers``.
    """
    if runs < 1:
        raise ParameterError("runs must be >= 1")
    family.validate()
    if grid is None:
        if horizon is None:
            raise ParameterError("give either a grid or a horizon")
        grid = uniform_grid(horizon)
    grid = check_grid(grid)
    horizon = float(grid[-1]) if horizon is None else float(horizon)
    if horizon < grid[-1]:
        raise ParameterError("horizon must cover the whole grid")
    fixed = None if resample_graph else family.generate(fixed_graph_seed(master_seed))

    def job(r):
        return _replicate(family, params, horizon, grid, master_seed, r,
                          resample_graph, fixed, by_degree)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(runs)))
    else:
        results = [job(r) for r in range(runs)]

    fracs = np.array([f for f, _ in results])
    mean = fracs.mean(axis=0)
    stderr = fracs.std(axis=0, ddof=1) / np.sqrt(runs) if runs > 1 else np.zeros_like(mean)
    traj = Trajectory(grid, mean, stderr)
    if not by_degree:
        return EnsembleResult(traj, runs)

    strata, counts = _pool_strata([s for _, s in results], grid)
    return EnsembleResult(traj, runs, strata, counts)


def _pool_strata(per_run: list, grid: np.ndarray):
    """Ratio estimator of the per-degree susceptible fraction across runs."""
    degrees = sorted({d for s in per_run for d in s})
    strata, counts = {}, {}
    R = len(per_run)
    for d in degrees:
        sus = np.array([s[d][0] if d in s else np.zeros(grid.size) for s in per_run])
        n = np.array([s[d][1] if d in s else 0 for s in per_run], dtype=float)
        total = n.sum()
        if total == 0:
            continue
        value = sus.sum(axis=0) / total
        if R > 1:
            resid = sus - value[None, :] * n[:, None]
            se = np.sqrt((resid ** 2).sum(axis=0) / (R * (R - 1))) / (total / R)
        else:
            se = np.sqrt(value * (1 - value) / total)
        strata[d] = Trajectory(grid, value, se)
        counts[d] = int(total)
    return strata, counts


def conditional_susceptibility_by_degree(lam_or_family, params: SpreadParams, runs: int,
                                         grid=None, *, M: int = 2000, horizon=None,
                                         master_seed: int = 0, workers: int = 1) -> dict:
    """Mean susceptibility of degree-d nodes on resampled ER graphs, as ``{d: Trajectory}``.

    Degrees that never occur are omitted.  Pass an ER :class:`Family` or a
    mean degree (with ``M``).
    """
    if isinstance(lam_or_family, Family):
        family = lam_or_family
    else:
        family = Family("er", (int(M), float(lam_or_family)))
    if family.kind != "er":
        raise ParameterError("conditional susceptibility is defined for the ER family")
    res = ensemble(family, params, runs, grid, horizon=horizon, resample_graph=True,
                   master_seed=master_seed, by_degree=True, workers=workers)
    return res.by_degree
