"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary).  Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import time

import networkx as nx
import numpy as np
import pytest

from spreadnet import analytic as A
from spreadnet.config import SweepSpec, load_preset
from spreadnet.experiments import cycle_table, run_compare, run_lattice, sweep_metric
from spreadnet.graphgen import Family, expected_cycles_er, expected_cycles_er_finite
from spreadnet.network import Graph, NetworkInstance, SpreadParams
from spreadnet.oracle import exact_marginals, funnel_check
from spreadnet.sim import empirical_susceptibility, simulate_many

pytestmark = pytest.mark.slow

BASS = SpreadParams(0.001, 0.05, 0.0)
SI = SpreadParams(0.0, 0.05, 0.1)


def _compare_presets(names):
    rows = []
    for name in names:
        start = time.perf_counter()
        out = run_compare(load_preset(name).replace(workers=4))
        rows.append((name, out.deviation, out.allowed, time.perf_counter() - start, out))
    return rows


def _summary(rows):
    return "; ".join(f"{n} dev={d:.4f} tol={a:.4f} {s:.1f}s" for n, d, a, s, _ in rows)


def test_criterion_01_er_bass(report):
    rows = _compare_presets(["fig1a", "fig1b"])
    ok = all(d <= a and s <= 120 for _, d, a, s, _ in rows)
    assert all(a == max(0.015, 4 * o.notes["max_stderr"]) for _, _, a, _, o in rows)
    report(1, ok, "ER Bass vs exact curve: " + _summary(rows))


def test_criterion_02_er_si(report):
    rows = _compare_presets(["fig3a", "fig3b"])
    ok = all(d <= a and s <= 120 for _, d, a, s, _ in rows)
    sim_end = rows[1][4].columns[1][-1]
    f_inf = A.final_infection_level(3.0, 0.1)
    plateau = sim_end < 1 and abs(sim_end - f_inf) <= 1e-2
    report(2, ok and plateau, "ER SI vs exact curve: " + _summary(rows)
           + f"; lambda=3 plateau {sim_end:.4f} vs f_inf {f_inf:.4f}")


def test_criterion_03_dregular(report):
    rows = _compare_presets([f"fig{n}{c}" for n in (5, 6) for c in "abcd"])
    ok = all(d <= max(0.02, a) and s <= 300 for _, d, a, s, _ in rows)
    report(3, ok, "d-regular vs exact curve: " + _summary(rows))


def _random_small_network(rng, with_cycles):
    M = int(rng.integers(4, 11))
    edges = {(int(rng.integers(0, k)), k) for k in range(1, M)}
    if with_cycles:
        target = len(edges) + int(rng.integers(1, 3))
        while len(edges) < target:
            u, v = sorted(rng.choice(M, 2, replace=False).tolist())
            edges.add((u, v))
    return Graph.from_edges(M, sorted(edges))


def test_criterion_04_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    grid = np.linspace(0, 1.5, 11)
    runs = 100_000
    worst, checks, n_cyclic = 0.0, 0, 0
    for i in range(24):
        g = _random_small_network(rng, with_cycles=i % 2 == 1)
        n_cyclic += g.edge_count >= g.node_count
        inst = NetworkInstance(g, float(rng.uniform(0, 1)), float(rng.uniform(0.1, 2)),
                               float(rng.choice([0.0, 0.2])))
        exact = np.array([tr.values for tr in exact_marginals(inst, grid)])
        empirical, _ = empirical_susceptibility(simulate_many(inst, grid[-1], runs, seed=i), grid)
        se = np.sqrt(np.clip(exact * (1 - exact), 0, None) / runs) + 1e-9
        worst = max(worst, float(np.max(np.abs(empirical - exact) / se)))
        checks += exact.size
    report(4, worst <= 4 and n_cyclic >= 10,
           f"24 networks ({n_cyclic} with cycles), {checks} node-time checks, "
           f"max |z| = {worst:.2f} (limit 4)")


def test_criterion_05_funnel(report):
    t = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
    tree_gap, n_trees = 0.0, 0
    for M in range(2, 10):
        for tree in nx.nonisomorphic_trees(M):
            g = Graph.from_edges(M, list(tree.edges()))
            n_trees += 1
            for j in range(M):
                rep = funnel_check(NetworkInstance(g, 1.0, 1.0, 0.0), j, t)
                tree_gap = max(tree_gap, float(np.max(np.abs(rep.gap))))
    cycle_ok, min_gap, max_ratio = True, np.inf, 0.0
    for n in range(3, 9):
        rep = funnel_check(NetworkInstance(Graph.from_edges(n, [(k, (k + 1) % n) for k in range(n)]),
                                           1.0, 1.0, 0.0), 0, t)
        gap, bound = rep.gap[1:], rep.bound[1:]
        cycle_ok &= bool(np.all(gap > 0) and np.all(gap <= bound))
        min_gap = min(min_gap, float(gap.min()))
        max_ratio = max(max_ratio, float(np.max(gap / bound)))
    report(5, tree_gap <= 1e-7 and cycle_ok,
           f"{n_trees} trees: max |gap| = {tree_gap:.2e} (limit 1e-7); cycles C3..C8: "
           f"min gap = {min_gap:.2e} > 0, max gap/bound = {max_ratio:.3f} <= 1")


def test_criterion_06_identities(report):
    grid = np.linspace(0, 400, 801)
    d2 = max(float(np.max(np.abs(A.solve_dreg(P, 2, grid).trajectory.values - A.f_1d(grid, P))))
             for P in (BASS, SI))
    comp = float(np.max(np.abs(A.f_compartmental(BASS, grid).values
                               - A.f_compartmental_closed(grid, BASS.p, BASS.q))))
    yz = max(float(np.max(np.abs(A.solve_er(P, lam, grid, "y").trajectory.values
                                 - A.solve_er(P, lam, grid, "z").trajectory.values)))
             for lam in (1.0, 10.0, 100.0) for P in (BASS, SI))
    report(6, d2 <= 1e-7 and comp <= 1e-8 and yz <= 1e-7,
           f"d=2 vs 1D {d2:.1e} (1e-7); compartmental closed vs ODE {comp:.1e} (1e-8); "
           f"z vs y form {yz:.1e} (1e-7)")


def test_criterion_07_limits(report):
    t = np.linspace(0, 100, 1001)
    compart = A.f_compartmental(BASS, t).values
    er = float(np.max(np.abs(A.solve_er(BASS, 1e3, t).trajectory.values - compart)))
    dreg = float(np.max(np.abs(A.solve_dreg(BASS, 100, t).trajectory.values - compart)))
    report(7, er <= 1e-2 and dreg <= 1e-2,
           f"ER lambda=1000 vs compartmental {er:.2e}; d=100 vs compartmental {dreg:.2e} (limit 1e-2)")


def test_criterion_08_phase_transition(report):
    lams = np.linspace(0, 4, 401)
    h = lams[1] - lams[0]
    spec_inf = SweepSpec("lambda", 0, 4, lams.size, "f_infinity")
    er = Family("er", (2000, 1.0))

    def f_inf(i0):
        return np.array([sweep_metric(er, SpreadParams(0.0, 0.05, i0), spec_inf, x) for x in lams])

    gc = np.array([A.giant_component(x) for x in lams])
    small = f_inf(1e-4)
    sup = float(np.max(np.abs(small - gc)))
    at = float(lams[np.argmax(np.abs(small - gc))])
    smooth = float(np.max(np.abs(np.diff(f_inf(0.1), 2))) / h ** 2)
    kinked = float(np.max(np.abs(np.diff(small, 2))) / h ** 2)
    report(8, sup <= 1e-2 and smooth <= 10.0,
           f"sup|f_inf(i0=1e-4) - X| = {sup:.4f} at lambda={at:.2f} (limit 1e-2); "
           f"max |second difference| for i0=0.1: {smooth:.2f} (bound 10; i0=1e-4 gives {kinked:.1f})")


def test_criterion_09_monotonicity(report):
    lams = np.linspace(0.25, 8, 32)
    times = np.array([0.0, 10.0, 50.0, 100.0])
    ok_er = True
    for P in (BASS, SI):
        vals = np.array([A.solve_er(P, lam, times).trajectory.values[1:] for lam in lams])
        ok_er &= bool(np.all(np.diff(vals, axis=0) > 0))
    degrees = [2, 3, 4, 5, 10, 100]
    ok_d = True
    for P in (BASS, SI):
        vals = np.array([A.solve_dreg(P, d, times).trajectory.values[1:] for d in degrees])
        ok_d &= bool(np.all(np.diff(vals, axis=0) > 0))
    half = np.array([A.half_life("er", BASS, lam=lam) for lam in lams])
    ok_h = bool(np.all(np.diff(half) < 0))
    report(9, ok_er and ok_d and ok_h,
           f"f_ER increasing over {lams.size} lambdas: {ok_er}; f_dreg increasing over d={degrees}: "
           f"{ok_d}; half-life decreasing from {half[0]:.1f} to {half[-1]:.1f}: {ok_h}")


def test_criterion_10_cycle_counts(report):
    M, lam, lengths, graphs = 1000, 3.0, [3, 4, 5], 300
    parts, ok = [], True
    for d in (2, 3, 4):
        out = cycle_table(Family("er", (M, lam)), lengths, graphs, seed=10 + d, degree=d)
        _, mean, se, expected = out.columns
        z = (mean - expected) / se
        # the finite-M mean equals the bound at L = 3 and is strictly below it beyond
        finite = [expected_cycles_er_finite(d, lam, L, M) for L in lengths]
        bound_ok = (finite[0] == expected[0] and all(f < e for f, e in zip(finite[1:], expected[1:]))
                    and bool(np.all(mean <= expected + 3 * se)))
        ok &= bool(np.all(np.abs(z) <= 3)) and bound_ok
        parts.append(f"ER d={d} z={np.array2string(z, precision=2)}")
    out = cycle_table(Family("dreg", (M, 3)), lengths, graphs, seed=99)
    _, mean, se, expected = out.columns
    z = (mean - expected) / se
    ok &= bool(np.all(np.abs(z) <= 3))
    parts.append(f"3-regular z={np.array2string(z, precision=2)}")
    report(10, ok, f"M={M}, {graphs} graphs, L=3..5: " + "; ".join(parts) + " (limit 3)")


def test_criterion_11_lattice_vs_regular(report):
    parts, ok = [], True
    for name in ["fig8a", "fig9a", "fig8b", "fig9b", "fig8c", "fig9c"]:
        cfg = load_preset(name).replace(workers=4)
        out = run_lattice(cfg)
        ok &= bool(out.passed)
        parts.append(f"{name} min (reg-torus)/se = {out.notes['min_difference_over_se']:.2f}")
    report(11, ok, "D=1 two-sided within 4 se, D=2,3 one-sided within 2 se: " + "; ".join(parts))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
