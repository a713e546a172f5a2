"""Core domain types: graphs, spreading parameters, weighted instances, trajectories.

Graphs are stored in compressed sparse row form (``indptr``/``indices``) with
each neighbor list sorted ascending, which is what the simulation kernels
consume directly.  All objects are immutable after construction.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import ParameterError, ShapeError

PathLike = Union[str, os.PathLike]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0..node_count-1``."""

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        if self.node_count < 1:
            raise ParameterError(f"node_count must be positive, got {self.node_count}")
        object.__setattr__(self, "indptr", _frozen(np.asarray(self.indptr, dtype=np.int64)))
        object.__setattr__(self, "indices", _frozen(np.asarray(self.indices, dtype=np.int64)))
        if self.indptr.shape != (self.node_count + 1,):
            raise ShapeError("indptr must have node_count + 1 entries")

    @classmethod
    def from_edges(cls, node_count: int, edges) -> "Graph":
        """Build a graph from an iterable or ``(E, 2)`` array of node pairs.

        Raises ``ShapeError`` on self-loops, duplicate edges or out-of-range ids.
        """
        if node_count < 1:
            raise ParameterError(f"node_count must be positive, got {node_count}")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= node_count:
                raise ShapeError("edge endpoint outside 0..M-1")
            if np.any(e[:, 0] == e[:, 1]):
                raise ShapeError("self-loops are not allowed")
            e = np.sort(e, axis=1)
            keys = e[:, 0] * node_count + e[:, 1]
            if np.unique(keys).size != keys.size:
                raise ShapeError("duplicate edges are not allowed")
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=node_count), out=indptr[1:])
        return cls(node_count, indptr, dst)

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Iterable[int]]) -> "Graph":
        edges = [(u, v) for u, nbrs in enumerate(adjacency) for v in nbrs if u < v]
        g = cls.from_edges(len(adjacency), edges)
        for u, nbrs in enumerate(adjacency):
            if sorted(set(nbrs)) != list(g.neighbors(u)):
                raise ShapeError(f"adjacency is not symmetric at node {u}")
        return g

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(j).tolist() for j in range(self.node_count)]

    def neighbors(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Canonical ``(E, 2)`` edge array, ``u < v``, sorted lexicographically."""
        src = np.repeat(np.arange(self.node_count), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def without_edges(self, edges) -> "Graph":
        drop = {tuple(sorted(map(int, e))) for e in edges}
        keep = [tuple(e) for e in self.edges().tolist() if tuple(e) not in drop]
        return Graph.from_edges(self.node_count, keep)

    def validate(self) -> None:
        """Full scan for simplicity and symmetry; raises ``ShapeError``."""
        for j in range(self.node_count):
            nb = self.neighbors(j)
            if nb.size and (np.any(np.diff(nb) <= 0) or nb[0] < 0 or nb[-1] >= self.node_count):
                raise ShapeError(f"neighbor list of node {j} is not sorted/unique")
            if np.any(nb == j):
                raise ShapeError(f"self-loop at node {j}")
            for k in nb:
                if not self.has_edge(int(k), j):
                    raise ShapeError(f"edge ({j},{k}) is not symmetric")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.node_count, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


def dumps_edgelist(graph: Graph) -> str:
    """Edge-list text: first line ``"M E"``, then one ``"u v"`` line per edge, u < v."""
    buf = io.StringIO()
    e = graph.edges()
    buf.write(f"{graph.node_count} {len(e)}\n")
    for u, v in e:
        buf.write(f"{u} {v}\n")
    return buf.getvalue()


def loads_edgelist(text: str) -> Graph:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise ShapeError("edge list must start with a 'M E' header line")
    m, e = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != e:
        raise ShapeError(f"header declares {e} edges but found {len(body)}")
    edges = []
    for lineno, parts in enumerate(body, start=2):
        if len(parts) != 2:
            raise ShapeError(f"line {lineno}: expected 'u v'")
        u, v = int(parts[0]), int(parts[1])
        if not u < v:
            raise ShapeError(f"line {lineno}: edges must be written with u < v")
        edges.append((u, v))
    return Graph.from_edges(m, edges)


def write_edgelist(graph: Graph, path: PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_edgelist(graph))


def read_edgelist(path: PathLike) -> Graph:
    with open(path) as fh:
        return loads_edgelist(fh.read())


@dataclass(frozen=True)
class SpreadParams:
    """Rates of the model: external rate ``p``, internal rate ``q``, initial adoption ``i0``."""

    p: float
    q: float
    i0: float = 0.0

    def __post_init__(self):
        if not self.p >= 0:
            raise ParameterError(f"p must be >= 0, got {self.p}")
        if not self.q > 0:
            raise ParameterError(f"q must be > 0, got {self.q}")
        if not 0 <= self.i0 < 1:
            raise ParameterError(f"i0 must lie in [0, 1), got {self.i0}")
        if self.p == 0 and self.i0 == 0:
            raise ParameterError("p > 0 or i0 > 0 is required (otherwise nothing ever spreads)")

    @classmethod
    def bass(cls, p: float, q: float) -> "SpreadParams":
        return cls(p=p, q=q, i0=0.0)

    @classmethod
    def si(cls, q: float, i0: float) -> "SpreadParams":
        return cls(p=0.0, q=q, i0=i0)


@dataclass(frozen=True)
class NetworkInstance:
    """A graph with homogeneous node weight ``p`` and edge weight ``q_{k,j}``.

    ``i0`` may be 0 or 1 and no validation of ``p > 0 or i0 > 0`` is done here,
    so frozen or deterministic configurations can be expressed.
    """

    graph: Graph
    node_weight: float
    edge_weight: float
    i0: float = 0.0

    def __post_init__(self):
        if not self.node_weight >= 0:
            raise ParameterError("node_weight must be >= 0")
        if not self.edge_weight >= 0:
            raise ParameterError("edge_weight must be >= 0")
        if not 0 <= self.i0 <= 1:
            raise ParameterError("i0 must lie in [0, 1]")

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def incident_weight(self) -> np.ndarray:
        """Sum of incoming edge weights per node."""
        return self.graph.degrees * self.edge_weight

    def with_graph(self, graph: Graph) -> "NetworkInstance":
        return NetworkInstance(graph, self.node_weight, self.edge_weight, self.i0)


def make_instance(graph: Graph, params: SpreadParams, edge_weight: Optional[float] = None) -> NetworkInstance:
    """Instance with edge weight ``q`` unless another weight is given."""
    w = params.q if edge_weight is None else edge_weight
    return NetworkInstance(graph, params.p, w, params.i0)


def make_er_instance(graph: Graph, params: SpreadParams, lam: float) -> NetworkInstance:
    """Edge weight ``q / lam`` so the expected total weight stays ``(M-1) q``."""
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    return NetworkInstance(graph, params.p, params.q / lam, params.i0)


def make_dreg_instance(graph: Graph, params: SpreadParams, d: int) -> NetworkInstance:
    """Edge weight ``q / d``; every node must have degree exactly ``d``."""
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    deg = graph.degrees
    bad = np.flatnonzero(deg != d)
    if bad.size:
        j = int(bad[0])
        raise ShapeError(f"node {j} has degree {int(deg[j])}, expected {d}")
    return NetworkInstance(graph, params.p, params.q / d, params.i0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Values on a time grid, optionally with a per-point standard error."""

    times: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        t = _frozen(np.asarray(self.times, dtype=float))
        v = _frozen(np.asarray(self.values, dtype=float))
        if t.ndim != 1 or t.shape != v.shape:
            raise ShapeError("times and values must be 1-D arrays of equal length")
        if t.size == 0 or t[0] != 0:
            raise ShapeError("a trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ShapeError("times must be strictly increasing")
        if np.any(v < -1e-9) or np.any(v > 1 + 1e-9):
            raise ShapeError("trajectory values must lie in [0, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            s = _frozen(np.asarray(self.stderr, dtype=float))
            if s.shape != t.shape or np.any(s < 0):
                raise ShapeError("stderr must be nonnegative and match times")
            object.__setattr__(self, "stderr", s)

    def __len__(self):
        return self.times.size

    def at(self, t) -> np.ndarray:
        """Linear interpolation of the values at times ``t``."""
        return np.interp(t, self.times, self.values)


def uniform_grid(horizon: float, n: int = 201) -> np.ndarray:
    if not horizon > 0:
        raise ParameterError("horizon must be > 0")
    if n < 2:
        raise ParameterError("a grid needs at least 2 points")
    return np.linspace(0.0, horizon, n)


def check_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ParameterError("grid must be strictly increasing and start at 0")
    return t
