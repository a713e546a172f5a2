import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spreadnet.errors import CapacityError, ParameterError, ShapeError
from spreadnet.graphgen import gen_complete, gen_cycle, gen_isolated, gen_path, gen_star
from spreadnet.network import Graph, NetworkInstance
from spreadnet.oracle import (MasterEquation, cycle_envelope, exact_marginals,
                              exact_marginals_and_pairs, exact_pair_survival, funnel_check,
                              indifference_check)

T = np.linspace(0, 3, 13)


def test_isolated_node():
    s = exact_marginals(NetworkInstance(gen_isolated(1), 0.4, 0.0, 0.2), T)[0].values
    assert np.max(np.abs(s - 0.8 * np.exp(-0.4 * T))) < 1e-10


def test_dyad_closed_form():
    p, q = 0.3, 1.1
    s = exact_marginals(NetworkInstance(Graph.from_edges(2, [(0, 1)]), p, q, 0.0), T)[0].values
    a = q / (q - p)
    assert np.max(np.abs(s - (a * np.exp(-2 * p * T) + (1 - a) * np.exp(-(p + q) * T)))) < 1e-10


def test_probability_is_conserved():
    me = MasterEquation(NetworkInstance(gen_complete(5), 0.2, 0.5, 0.1))
    P = me.solve(T)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-10)
    assert P.min() > -1e-10
    # all mass ends in the all-adopted state
    assert me.solve(np.array([0.0, 200.0]))[-1, -1] == pytest.approx(1.0, abs=1e-8)


def test_master_equation_residual():
    # the susceptibility of node j obeys d[S_j]/dt = -(p + sum_k q)[S_j] + sum_k q [S_kj]
    p, q = 0.3, 0.8
    g = gen_star(3)
    t = np.linspace(0, 2, 201)
    single, pairs = exact_marginals_and_pairs(NetworkInstance(g, p, q, 0.1), t)
    lhs = np.gradient(single[0], t, edge_order=2)
    rhs = -(p + 3 * q) * single[0] + q * pairs[0, 1:].sum(axis=0)
    assert np.max(np.abs(lhs - rhs)) < 1e-4


def test_pair_survival_consistency():
    inst = NetworkInstance(gen_cycle(5), 0.2, 0.7, 0.1)
    single, pairs = exact_marginals_and_pairs(inst, T)
    direct = exact_pair_survival(inst, 1, 3, T).values
    assert np.allclose(pairs[1, 3], direct, atol=1e-12)
    assert np.all(pairs[1, 3] <= np.minimum(single[1], single[3]) + 1e-12)


def test_initial_configuration_override():
    inst = NetworkInstance(gen_path(3), 0.0, 1.0, 0.0)
    s = exact_marginals(inst, T, initial=[1.0, 0.0, 0.0])
    # only node 0 starts adopted; node 1 then waits Exp(1)
    assert np.allclose(s[0].values, 0.0)
    assert np.allclose(s[1].values, np.exp(-T), atol=1e-10)
    with pytest.raises(ParameterError):
        exact_marginals(inst, T, initial=[0.5])


def test_capacity_limit():
    with pytest.raises(CapacityError):
        MasterEquation(NetworkInstance(gen_cycle(17), 0.1, 1.0))
    with pytest.raises(CapacityError):
        MasterEquation(NetworkInstance(gen_cycle(21), 0.1, 1.0), max_nodes=30)


@given(st.integers(3, 8), st.floats(0.0, 1.0), st.floats(0.1, 2.0), st.sampled_from([0.0, 0.2]))
@settings(max_examples=20, deadline=None)
def test_marginals_are_monotone_and_symmetric_on_cycles(n, p, q, i0):
    if p == 0 and i0 == 0:
        p = 0.1
    s = np.array([tr.values for tr in exact_marginals(NetworkInstance(gen_cycle(n), p, q, i0), T)])
    assert np.all(np.diff(s, axis=1) <= 1e-10)
    assert np.allclose(s, s[0], atol=1e-9)


def test_cycle_envelope_switches_bounds():
    t = np.array([0.1, 1.0, 10.0])
    env = cycle_envelope(t, 5, 1.0, 1.0, 0.0)
    assert env[-1] == pytest.approx(2 * 0.5 ** 3)
    assert env[0] < env[-1]
    assert np.all(env <= 2 * 0.5 ** 3 + 1e-15)


def test_funnel_exact_on_trees():
    for g in [gen_path(5), gen_star(4), Graph.from_edges(6, [(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)])]:
        for j in range(g.node_count):
            rep = funnel_check(NetworkInstance(g, 1.0, 1.0, 0.1), j, T)
            assert np.max(np.abs(rep.gap)) < 1e-9
            assert not rep.cycles and np.all(rep.bound == 0)


def test_funnel_gap_on_cycles():
    t = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
    for n in range(3, 9):
        rep = funnel_check(NetworkInstance(gen_cycle(n), 1.0, 1.0, 0.0), 0, t)
        assert rep.cycles == {n: 1}
        assert np.all(rep.gap[1:] > 0) and np.all(rep.gap <= rep.bound)
    text = rep.to_csv().splitlines()
    assert text[0] == "t,lhs,rhs,gap,bound" and len(text) == 6


def test_funnel_node_validation():
    with pytest.raises(ParameterError):
        funnel_check(NetworkInstance(gen_cycle(4), 1.0, 1.0), 7, T)


def test_indifference_principle():
    for g in [gen_cycle(6), gen_complete(5), gen_star(3)]:
        inst = NetworkInstance(g, 0.2, 0.7, 0.1)
        for j, k in g.edges()[:3]:
            assert indifference_check(inst, int(j), int(k), T) < 1e-9
    with pytest.raises(ShapeError):
        indifference_check(NetworkInstance(gen_path(3), 0.2, 0.7), 0, 2, T)
