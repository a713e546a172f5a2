"""Exact Kolmogorov forward (master) equations on small networks.

The joint law of the node states is a vector over all ``2**M`` bitmasks
(bit j set means node j has adopted).  The only transitions flip a single
bit from 0 to 1, so the generator has ``M 2**(M-1)`` off-diagonal entries
and is stored as a sparse matrix: every state loses probability at its total
hazard and passes it to its one-bit successors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .errors import CapacityError, ParameterError, ShapeError
from .graphgen import count_cycles_through
from .network import Graph, NetworkInstance, Trajectory, check_grid

HARD_CAP = 20
DEFAULT_CAP = 16
RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    """Probability of every configuration; index bit j is the state of node j."""

    probabilities: np.ndarray
    node_count: int

    def total(self) -> float:
        return float(self.probabilities.sum())

    def susceptible(self, *nodes: int) -> float:
        """Probability that all ``nodes`` are still susceptible."""
        mask = 0
        for j in nodes:
            mask |= 1 << j
        idx = np.arange(self.probabilities.size)
        return float(self.probabilities[(idx & mask) == 0].sum())


class MasterEquation:
    """Forward equations of the process on one network instance.

    ``initial`` optionally gives a per-node adoption probability at t = 0
    (0 or 1 for deterministic starting configurations); by default every
    node uses the instance's ``i0``.
    """

    def __init__(self, instance: NetworkInstance, initial=None, max_nodes: int = DEFAULT_CAP):
        M = instance.node_count
        cap = min(max_nodes, HARD_CAP)
        if M > cap:
            raise CapacityError(f"{M} nodes exceed the state-space cap of {cap}")
        self.instance = instance
        self.M = M
        if initial is None:
            init = np.full(M, float(instance.i0))
        else:
            init = np.asarray(initial, dtype=float)
            if init.shape != (M,) or np.any(init < 0) or np.any(init > 1):
                raise ParameterError("initial must hold one probability in [0, 1] per node")
        self.initial = init

        n = 1 << M
        states = np.arange(n, dtype=np.int64)
        g = instance.graph
        p, w = float(instance.node_weight), float(instance.edge_weight)
        rows, cols, vals = [], [], []
        outflow = np.zeros(n)
        for j in range(M):
            bit = 1 << j
            nbr_mask = 0
            for k in g.neighbors(j):
                nbr_mask |= 1 << int(k)
            src = states[(states & bit) == 0]
            pressure = _popcount(src & nbr_mask)
            rate = p + w * pressure
            outflow[src] += rate
            rows.append(src | bit)
            cols.append(src)
            vals.append(rate)
        rows.append(states)
        cols.append(states)
        vals.append(-outflow)
        self.generator = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))

    def initial_law(self) -> np.ndarray:
        P = np.ones(1)
        for pi in self.initial:
            P = np.concatenate([P * (1 - pi), P * pi])
        return P

    def rhs(self, t, P):
        return self.generator @ P

    def solve(self, times) -> np.ndarray:
        """State probabilities at each requested time, shape ``(len(times), 2**M)``."""
        times = check_grid(times)
        P0 = self.initial_law()
        if times.size == 1:
            return P0[None, :]
        sol = solve_ivp(self.rhs, (0.0, float(times[-1])), P0, method="DOP853",
                        t_eval=times, rtol=RTOL, atol=ATOL)
        if not sol.success:
            raise RuntimeError(sol.message)
        return sol.y.T

    def state_vectors(self, times) -> list[StateVector]:
        return [StateVector(P, self.M) for P in self.solve(times)]


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a >>= 1
    return count


def _susceptible_mask(M: int, nodes) -> np.ndarray:
    mask = 0
    for j in nodes:
        mask |= 1 << int(j)
    return (np.arange(1 << M) & mask) == 0


def exact_marginals(instance: NetworkInstance, times, initial=None,
                    max_nodes: int = DEFAULT_CAP) -> list[Trajectory]:
    """Exact susceptibility ``[S_j](t)`` of every node."""
    times = check_grid(times)
    me = MasterEquation(instance, initial, max_nodes)
    P = me.solve(times)
    return [Trajectory(times, P[:, _susceptible_mask(me.M, [j])].sum(axis=1))
            for j in range(me.M)]


def exact_pair_survival(instance: NetworkInstance, j: int, k: int, times, initial=None,
                        max_nodes: int = DEFAULT_CAP) -> Trajectory:
    """Exact probability ``[S_{k,j}](t)`` that nodes j and k are both susceptible."""
    times = check_grid(times)
    me = MasterEquation(instance, initial, max_nodes)
    P = me.solve(times)
    return Trajectory(times, P[:, _susceptible_mask(me.M, [j, k])].sum(axis=1))


def exact_marginals_and_pairs(instance: NetworkInstance, times, initial=None,
                              max_nodes: int = DEFAULT_CAP):
    """Marginals ``(M, T)`` and pair survivals ``(M, M, T)`` from one integration."""
    times = check_grid(times)
    me = MasterEquation(instance, initial, max_nodes)
    P = me.solve(times)
    M = me.M
    single = np.array([P[:, _susceptible_mask(M, [j])].sum(axis=1) for j in range(M)])
    pairs = np.empty((M, M, times.size))
    for j in range(M):
        pairs[j, j] = single[j]
        for k in range(j + 1, M):
            pairs[j, k] = pairs[k, j] = P[:, _susceptible_mask(M, [j, k])].sum(axis=1)
    return single, pairs


# -------------------------------------------------------------- funnel theorem


def cycle_envelope(t, L: int, p: float, q: float, i0: float) -> np.ndarray:
    """Upper bound on the effect of one cycle with L nodes.

    Pointwise minimum of the short-time bound
    ``2 (1-i0) e^{-(p+q)t} (e q t / h)^h`` (valid for ``t < h/q``) and the
    global bound ``2 (1-i0) (q/(p+q))^h``, with ``h = floor((L+1)/2)``.
    """
    t = np.asarray(t, dtype=float)
    h = (L + 1) // 2
    global_bound = 2 * (1 - i0) * (q / (p + q)) ** h
    short = 2 * (1 - i0) * np.exp(-(p + q) * t) * (np.e * q * t / h) ** h
    return np.where(t < h / q, np.minimum(short, global_bound), global_bound)


@dataclass(frozen=True, eq=False)
class FunnelReport:
    """Comparison of a node's susceptibility with the product over its single edges."""

    node: int
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gap: np.ndarray
    bound: np.ndarray
    cycles: dict

    def to_csv(self) -> str:
        rows = ["t,lhs,rhs,gap,bound"]
        for row in zip(self.times, self.lhs, self.rhs, self.gap, self.bound):
            rows.append(",".join(f"{float(v):.12g}" for v in row))
        return "\n".join(rows) + "\n"


def funnel_check(instance: NetworkInstance, j: int, times, max_nodes: int = DEFAULT_CAP) -> FunnelReport:
    """Exact ``[S_j]`` versus ``prod_i [S_j^{k_i,p_j}] / [S_j^{p_j}]^{d_j-1}``.

    ``S_j^{k_i,p_j}`` is computed on the network where j keeps only its edge
    to neighbor ``k_i``; ``S_j^{p_j}`` on the network where j has no edges.
    ``bound`` is ``[S_j^{p_j}] * sum over cycles through j of`` :func:`cycle_envelope`.
    """
    times = check_grid(times)
    g = instance.graph
    if not 0 <= j < g.node_count:
        raise ParameterError(f"node {j} is not in the graph")
    nbrs = [int(k) for k in g.neighbors(j)]
    own_edges = [(j, k) for k in nbrs]

    def s_j(graph: Graph) -> np.ndarray:
        return exact_marginals(instance.with_graph(graph), times, max_nodes=max_nodes)[j].values

    lhs = s_j(g)
    alone = s_j(g.without_edges(own_edges))
    rhs = alone.copy() if not nbrs else np.ones_like(lhs)
    for k in nbrs:
        rhs = rhs * s_j(g.without_edges([e for e in own_edges if e[1] != k]))
    if len(nbrs) > 1:
        rhs = rhs / alone ** (len(nbrs) - 1)

    census = count_cycles_through(g, j, g.node_count) if g.node_count >= 3 else None
    cycles = {L: c for L, c in (census.counts.items() if census else []) if c}
    env = np.zeros_like(lhs)
    for L, c in cycles.items():
        env += c * cycle_envelope(times, L, instance.node_weight, instance.edge_weight, instance.i0)
    return FunnelReport(j, times, lhs, rhs, lhs - rhs, alone * env, cycles)


def indifference_check(instance: NetworkInstance, j: int, k: int, times,
                       max_nodes: int = DEFAULT_CAP) -> float:
    """Largest change in ``[S_{k,j}]`` when the edge between j and k is deleted.

    While both endpoints are susceptible the edge carries no influence, so
    the joint survival of the pair must not depend on it.
    """
    g = instance.graph
    if not g.has_edge(j, k):
        raise ShapeError(f"({j}, {k}) is not an edge")
    with_edge = exact_pair_survival(instance, j, k, times, max_nodes=max_nodes).values
    without = exact_pair_survival(instance.with_graph(g.without_edges([(j, k)])), j, k, times,
                                  max_nodes=max_nodes).values
    return float(np.max(np.abs(with_edge - without)))
