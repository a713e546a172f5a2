"""Seeded graph generators, cycle census and degree-distribution formulas."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from scipy import stats

from .errors import ParameterError, ParityError, ShapeError
from .network import Graph, NetworkInstance, SpreadParams

# pairing with full restart is used while the simple-graph acceptance
# probability exp(-(d^2-1)/4) stays above ~2%
_RESTART_MAX_DEGREE = 4
_MAX_RESTARTS = 100_000


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# --------------------------------------------------------------------------- ER


def _pair_from_index(k: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over the lexicographic pairs (u < v) to (u, v)."""
    k = np.asarray(k, dtype=np.int64)
    # offset(u) = u*(2m-u-1)/2 is the index of pair (u, u+1)
    disc = (2 * m - 1) ** 2 - 8 * k.astype(np.float64)
    u = np.floor(((2 * m - 1) - np.sqrt(disc)) / 2).astype(np.int64)
    u = np.clip(u, 0, m - 2)

    def offset(x):
        return x * (2 * m - x - 1) // 2

    # correct floating-point slack
    u = np.where(offset(u) > k, u - 1, u)
    u = np.where(offset(u + 1) <= k, u + 1, u)
    v = k - offset(u) + u + 1
    return u, v


def gen_er(M: int, lam: float, seed=None) -> Graph:
    """Sample G(M, lam/M) by geometric skipping over the pair sequence."""
    if M < 1:
        raise ParameterError("M must be >= 1")
    if not 0 <= lam <= M:
        raise ParameterError(f"lambda must lie in [0, M], got {lam}")
    rng = _rng(seed)
    n_pairs = M * (M - 1) // 2
    prob = lam / M
    if n_pairs == 0 or prob == 0:
        return Graph.from_edges(M, np.empty((0, 2), dtype=np.int64))
    if prob >= 1:
        positions = np.arange(n_pairs, dtype=np.int64)
    else:
        chunks = []
        last = -1
        expected = n_pairs * prob
        size = int(expected + 5 * math.sqrt(expected) + 16)
        while last < n_pairs:
            gaps = rng.geometric(prob, size=size).astype(np.int64)
            pos = last + np.cumsum(gaps)
            chunks.append(pos)
            last = int(pos[-1])
            size = max(16, size // 4)
        positions = np.concatenate(chunks)
        positions = positions[positions < n_pairs]
    u, v = _pair_from_index(positions, M)
    return Graph.from_edges(M, np.column_stack([u, v]))


# -------------------------------------------------------------------- d-regular


def _pairing_attempt(M: int, d: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    stubs = rng.permutation(np.repeat(np.arange(M, dtype=np.int64), d)).reshape(-1, 2)
    if np.any(stubs[:, 0] == stubs[:, 1]):
        return None
    stubs.sort(axis=1)
    keys = stubs[:, 0] * M + stubs[:, 1]
    if np.unique(keys).size != keys.size:
        return None
    return stubs


@numba.njit(cache=True)
def _adjacent(nbr, deg, u, v):
    for i in range(deg[u]):
        if nbr[u, i] == v:
            return True
    return False


@numba.njit(cache=True)
def _steger_wormald_attempt(M, d, rng):
    nbr = np.full((M, d), -1, dtype=np.int64)
    deg = np.zeros(M, dtype=np.int64)
    points = np.empty(M * d, dtype=np.int64)
    for i in range(M * d):
        points[i] = i // d
    nfree = M * d
    fails = 0
    while nfree > 0:
        a = rng.integers(0, nfree)
        b = rng.integers(0, nfree)
        u = points[a]
        v = points[b]
        if a == b or u == v or _adjacent(nbr, deg, u, v):
            fails += 1
            if fails < 64 + 4 * nfree:
                continue
            # stalled: pick uniformly among the suitable pairs, if any remain
            n_ok = 0
            for i in range(nfree):
                for k in range(i + 1, nfree):
                    if points[i] != points[k] and not _adjacent(nbr, deg, points[i], points[k]):
                        n_ok += 1
            if n_ok == 0:
                return nbr, False
            pick = rng.integers(0, n_ok)
            n_ok = 0
            found = False
            for i in range(nfree):
                for k in range(i + 1, nfree):
                    if points[i] != points[k] and not _adjacent(nbr, deg, points[i], points[k]):
                        if n_ok == pick:
                            a = i
                            b = k
                            found = True
                            break
                        n_ok += 1
                if found:
                    break
            u = points[a]
            v = points[b]
        fails = 0
        nbr[u, deg[u]] = v
        deg[u] += 1
        nbr[v, deg[v]] = u
        deg[v] += 1
        hi = max(a, b)
        lo = min(a, b)
        points[hi] = points[nfree - 1]
        nfree -= 1
        points[lo] = points[nfree - 1]
        nfree -= 1
    return nbr, True


def gen_dregular(M: int, d: int, seed=None) -> Graph:
    """Random simple d-regular graph on M nodes.

    Small d uses the pairing model with full restart on any self-loop or
    multi-edge (exactly uniform); larger d pairs free stubs one at a time,
    rejecting unsuitable pairs (Steger-Wormald), with restart on dead ends.
    """
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    if d >= M:
        raise ParameterError(f"d must be < M, got d={d}, M={M}")
    if (d * M) % 2:
        raise ParityError(f"d*M = {d * M} is odd; no {d}-regular graph on {M} nodes")
    rng = _rng(seed)
    for _ in range(_MAX_RESTARTS):
        if d <= _RESTART_MAX_DEGREE:
            pairs = _pairing_attempt(M, d, rng)
            if pairs is not None:
                return Graph.from_edges(M, pairs)
        else:
            nbr, ok = _steger_wormald_attempt(M, d, rng)
            if ok:
                src = np.repeat(np.arange(M), d)
                dst = nbr.ravel()
                mask = src < dst
                return Graph.from_edges(M, np.column_stack([src[mask], dst[mask]]))
    raise RuntimeError(f"failed to generate a {d}-regular graph on {M} nodes")


# ------------------------------------------------------------- fixed families


def gen_cartesian_torus(D: int, side: int) -> Graph:
    """Periodic D-dimensional lattice with ``side**D`` nodes of degree 2D."""
    if D < 1:
        raise ParameterError("D must be >= 1")
    if side < 3:
        raise ParameterError(f"side must be >= 3, got {side}")
    n = side ** D
    idx = np.arange(n, dtype=np.int64)
    edges = []
    stride = 1
    for _ in range(D):
        coord = (idx // stride) % side
        nxt = idx + np.where(coord == side - 1, -(side - 1) * stride, stride)
        edges.append(np.column_stack([idx, nxt]))
        stride *= side
    return Graph.from_edges(n, np.concatenate(edges))


def gen_isolated(M: int) -> Graph:
    return Graph.from_edges(M, np.empty((0, 2), dtype=np.int64))


def gen_cycle(M: int) -> Graph:
    if M < 3:
        raise ParameterError(f"a cycle needs M >= 3, got {M}")
    a = np.arange(M)
    return Graph.from_edges(M, np.column_stack([a, (a + 1) % M]))


def gen_complete(M: int) -> Graph:
    u, v = np.triu_indices(M, k=1)
    return Graph.from_edges(M, np.column_stack([u, v]))


def gen_path(M: int) -> Graph:
    a = np.arange(M - 1)
    return Graph.from_edges(M, np.column_stack([a, a + 1]))


def gen_star(leaves: int) -> Graph:
    """Star with center 0 and ``leaves`` leaves."""
    a = np.arange(1, leaves + 1)
    return Graph.from_edges(leaves + 1, np.column_stack([np.zeros_like(a), a]))


# ---------------------------------------------------------------- cycle census


@dataclass(frozen=True)
class CycleCensus:
    """Number of distinct simple cycles through ``node``, keyed by length."""

    node: int
    counts: dict = field(default_factory=dict)

    def __getitem__(self, length: int) -> int:
        return self.counts.get(length, 0)

    def to_csv(self) -> str:
        lines = ["L,count"] + [f"{L},{c}" for L, c in sorted(self.counts.items())]
        return "\n".join(lines) + "\n"


@numba.njit(cache=True)
def _cycle_dfs(indptr, indices, starts, max_len, only_greater, counts):
    M = indptr.size - 1
    path = np.empty(max_len, dtype=np.int64)
    ptr = np.empty(max_len, dtype=np.int64)
    onpath = np.zeros(M, dtype=np.bool_)
    for s in starts:
        path[0] = s
        ptr[0] = indptr[s]
        onpath[s] = True
        depth = 0
        while depth >= 0:
            u = path[depth]
            if ptr[depth] < indptr[u + 1]:
                v = indices[ptr[depth]]
                ptr[depth] += 1
                if v == s:
                    L = depth + 1
                    # one orientation per cycle
                    if L >= 3 and path[1] < path[depth]:
                        if only_greater:
                            for i in range(L):
                                counts[path[i], L] += 1
                        else:
                            counts[s, L] += 1
                elif not onpath[v] and depth + 1 < max_len and (v > s or not only_greater):
                    depth += 1
                    path[depth] = v
                    ptr[depth] = indptr[v]
                    onpath[v] = True
            else:
                onpath[u] = False
                depth -= 1


def count_cycles_through(graph: Graph, j: int, max_len: int) -> CycleCensus:
    """Exact count of simple cycles of each length 3..max_len through node ``j``.

    Depth-first enumeration; exponential in the worst case, meant for small
    graphs or short cycles.
    """
    if max_len < 3:
        raise ParameterError(f"max_len must be >= 3, got {max_len}")
    if not 0 <= j < graph.node_count:
        raise ParameterError(f"node {j} is not in the graph")
    max_len = min(max_len, graph.node_count)
    counts = np.zeros((graph.node_count, max_len + 1), dtype=np.int64)
    if max_len >= 3:
        _cycle_dfs(graph.indptr, graph.indices, np.array([j], dtype=np.int64), max_len, False, counts)
    return CycleCensus(j, {L: int(counts[j, L]) for L in range(3, max_len + 1)})


def cycle_counts_all(graph: Graph, max_len: int) -> np.ndarray:
    """Matrix ``c[j, L]`` of cycles of length L through every node j.

    Each cycle is enumerated once from its smallest node and credited to all
    of its members.
    """
    if max_len < 3:
        raise ParameterError(f"max_len must be >= 3, got {max_len}")
    max_len = min(max_len, graph.node_count)
    counts = np.zeros((graph.node_count, max_len + 1), dtype=np.int64)
    if max_len >= 3:
        starts = np.arange(graph.node_count, dtype=np.int64)
        _cycle_dfs(graph.indptr, graph.indices, starts, max_len, True, counts)
    return counts


def expected_cycles_er(d: int, lam: float, L: int, M: int) -> float:
    """Asymptotic mean number of L-cycles through a degree-d node of G(M, lam/M).

    Also a strict upper bound for every finite M.
    """
    if d < 2 or not lam > 0 or L < 3 or M < L:
        raise ParameterError("need d >= 2, lambda > 0, 3 <= L <= M")
    return d * (d - 1) / 2 * lam ** (L - 2) / M


def expected_cycles_er_finite(d: int, lam: float, L: int, M: int) -> float:
    """Exact finite-M conditional mean: the asymptotic value times prod_{i=3}^{L-1} (M-i)/M."""
    factor = math.prod((M - i) / M for i in range(3, L))
    return expected_cycles_er(d, lam, L, M) * factor


def expected_cycles_dreg(d: int, L: int, M: int) -> float:
    """Asymptotic mean number of L-cycles through a node of a random d-regular graph."""
    if d < 3 or L < 3 or M < L:
        raise ParameterError("need d >= 3, 3 <= L <= M")
    return (d - 1) ** L / (2 * M)


def degree_pmf_poisson(d: int, lam: float) -> float:
    if d < 0 or lam < 0:
        raise ParameterError("need d >= 0 and lambda >= 0")
    return float(stats.poisson.pmf(d, lam))


def degree_pmf_binomial(d: int, lam: float, M: int) -> float:
    """Degree law of G(M, lam/M): Binomial(M-1, lam/M)."""
    if d < 0 or lam < 0 or lam > M:
        raise ParameterError("need d >= 0 and 0 <= lambda <= M")
    return float(stats.binom.pmf(d, M - 1, lam / M))


# ------------------------------------------------------------------- families

_FAMILY_ARITY = {
    "er": 2, "dreg": 2, "torus": 2, "isolated": 1, "cycle": 1, "complete": 1,
}


@dataclass(frozen=True)
class Family:
    """A graph family, e.g. ``Family("er", (2000, 3.0))``.

    ``instance`` applies the edge normalization of each family: ``q/lambda``
    for ER, ``q/d`` for d-regular, ``q/(2D)`` for the torus, ``q/2`` for the
    cycle and ``q/(M-1)`` for the complete graph.
    """

    kind: str
    args: tuple

    def __post_init__(self):
        if self.kind not in _FAMILY_ARITY:
            raise ParameterError(f"unknown family {self.kind!r}")
        if len(self.args) != _FAMILY_ARITY[self.kind]:
            raise ParameterError(f"{self.kind} takes {_FAMILY_ARITY[self.kind]} arguments")

    @classmethod
    def parse(cls, text: str) -> "Family":
        m = re.fullmatch(r"\s*(\w+)\s*\(([^)]*)\)\s*", text)
        if not m:
            raise ParameterError(f"cannot parse family {text!r}; expected e.g. 'er(2000, 3)'")
        kind = m.group(1).lower()
        raw = [a.strip() for a in m.group(2).split(",") if a.strip()]
        args = []
        for i, a in enumerate(raw):
            val = float(a)
            if not (kind == "er" and i == 1):
                if val != int(val):
                    raise ParameterError(f"{kind} argument {a!r} must be an integer")
                val = int(val)
            args.append(val)
        return cls(kind, tuple(args))

    def __str__(self):
        return f"{self.kind}({', '.join(str(a) for a in self.args)})"

    @property
    def node_count(self) -> int:
        if self.kind == "torus":
            D, side = self.args
            return side ** D
        return int(self.args[0])

    @property
    def is_random(self) -> bool:
        return self.kind in ("er", "dreg")

    def validate(self) -> None:
        """Check the arguments without generating anything."""
        if self.kind == "er":
            M, lam = self.args
            if M < 1 or not 0 < lam <= M:
                raise ParameterError(f"er needs M >= 1 and 0 < lambda <= M, got {self.args}")
        elif self.kind == "dreg":
            M, d = self.args
            if d < 2 or d >= M:
                raise ParameterError(f"dreg needs 2 <= d < M, got {self.args}")
            if (M * d) % 2:
                raise ParityError(f"d*M = {d * M} is odd")
        elif self.kind == "torus":
            D, side = self.args
            if D < 1 or side < 3:
                raise ParameterError(f"torus needs D >= 1 and side >= 3, got {self.args}")
        elif self.kind == "cycle":
            if self.args[0] < 3:
                raise ParameterError("cycle needs M >= 3")
        elif self.args[0] < 1:
            raise ParameterError(f"{self.kind} needs M >= 1")

    def generate(self, seed=None) -> Graph:
        k, a = self.kind, self.args
        if k == "er":
            return gen_er(a[0], a[1], seed)
        if k == "dreg":
            return gen_dregular(a[0], a[1], seed)
        if k == "torus":
            return gen_cartesian_torus(a[0], a[1])
        if k == "isolated":
            return gen_isolated(a[0])
        if k == "cycle":
            return gen_cycle(a[0])
        return gen_complete(a[0])

    def edge_weight(self, q: float) -> float:
        k, a = self.kind, self.args
        if k == "er":
            return q / a[1]
        if k == "dreg":
            return q / a[1]
        if k == "torus":
            return q / (2 * a[0])
        if k == "cycle":
            return q / 2
        if k == "complete":
            return q / max(a[0] - 1, 1)
        return q

    def instance(self, graph: Graph, params: SpreadParams) -> NetworkInstance:
        if graph.node_count != self.node_count:
            raise ShapeError("graph size does not match the family")
        return NetworkInstance(graph, params.p, self.edge_weight(params.q), params.i0)
