import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from spreadnet import analytic as A
from spreadnet.errors import NoCrossingError, ParameterError
from spreadnet.network import SpreadParams

BASS = SpreadParams(0.001, 0.05, 0.0)
SI = SpreadParams(0.0, 0.05, 0.1)
GRID = np.linspace(0, 400, 401)


def test_isolated_curve():
    t = np.array([0.0, 1.0, 10.0])
    assert A.f_isolated(t, 0.1).tolist() == pytest.approx(1 - np.exp(-0.1 * t))
    assert A.f_isolated(0.0, 0.1, 0.3) == pytest.approx(0.3)
    with pytest.raises(ParameterError):
        A.f_isolated(t, -1.0)


def test_compartmental_closed_form_matches_ode():
    ode = A.f_compartmental(BASS, GRID).values
    assert np.max(np.abs(ode - A.f_compartmental_closed(GRID, BASS.p, BASS.q))) < 1e-8
    t_half = A.half_life_compartmental_closed(BASS.p, BASS.q)
    assert A.f_compartmental_closed(t_half, BASS.p, BASS.q) == pytest.approx(0.5, abs=1e-12)
    assert A.half_life("compart", BASS) == pytest.approx(t_half, rel=1e-8)


@pytest.mark.parametrize("params", [BASS, SI, SpreadParams(0.2, 1.0, 0.3)])
def test_two_regular_equals_line(params):
    f = A.solve_dreg(params, 2, GRID).trajectory.values
    assert np.max(np.abs(f - A.f_1d(GRID, params))) < 1e-7


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
@pytest.mark.parametrize("params", [BASS, SI])
def test_er_y_and_z_forms_agree(lam, params):
    fy = A.solve_er(params, lam, GRID, form="y").trajectory.values
    fz = A.solve_er(params, lam, GRID, form="z").trajectory.values
    assert np.max(np.abs(fy - fz)) < 1e-7


def test_er_solution_fields():
    sol = A.solve_er(BASS, 3.0, GRID)
    assert sol.form == "y" and sol.lam == 3.0
    assert sol.y[0] == 1.0 and sol.z[0] == 0.0
    assert np.allclose(sol.z, 3.0 * (1 - sol.y))
    assert A.solve_er(BASS, 200.0, GRID).form == "z"
    with pytest.raises(ParameterError):
        A.solve_er(BASS, 0.0, GRID)
    with pytest.raises(ParameterError):
        A.solve_er(BASS, 3.0, GRID, form="w")


def test_er_dense_curve_matches_grid_solution():
    curve = A.er_curve(BASS, 2.0, 400.0)
    assert np.max(np.abs(curve(GRID) - A.solve_er(BASS, 2.0, GRID).trajectory.values)) < 1e-9


def test_er_si_plateau_is_final_level():
    f = A.solve_er(SI, 3.0, np.linspace(0, 5000, 11)).trajectory.values
    assert f[-1] == pytest.approx(A.final_infection_level(3.0, 0.1), abs=1e-9)


def test_dreg_solution_consistency():
    sol = A.solve_dreg(BASS, 5, GRID)
    assert sol.residual < 1e-10
    # the auxiliary y solves its own ODE
    base = np.exp(-BASS.p * GRID)
    dy = np.gradient(sol.y, GRID, edge_order=2)
    rhs = -(BASS.p + BASS.q / 5) * sol.y + (BASS.q / 5) * base ** -2 * sol.y ** 4
    assert np.max(np.abs(dy - rhs)) < 1e-5
    assert np.allclose(sol.trajectory.values, 1 - sol.susceptible)
    assert sol.y[0] == 1.0
    with pytest.raises(ParameterError):
        A.solve_dreg(BASS, 1, GRID)


def test_large_degree_limits():
    t = np.linspace(0, 100, 201)
    compart = A.f_compartmental(BASS, t).values
    assert np.max(np.abs(A.solve_er(BASS, 1000.0, t).trajectory.values - compart)) < 1e-2
    assert np.max(np.abs(A.solve_dreg(BASS, 100, t).trajectory.values - compart)) < 1e-2


def test_fixed_points():
    for lam in [0.5, 1.0, 1.5, 3.0]:
        f = A.final_infection_level(lam, 0.1)
        assert f == pytest.approx(1 - 0.9 * math.exp(-lam * f), abs=1e-12)
        assert A.ysi_infinity(lam, 0.1) == pytest.approx(1 - f, abs=1e-12)
    assert A.giant_component(0.5) == 0.0 and A.giant_component(1.0) == 0.0
    x = A.giant_component(3.0)
    assert x == pytest.approx(0.9404797907, abs=1e-9)
    assert x == pytest.approx(1 - math.exp(-3 * x), abs=1e-12)
    with pytest.raises(ParameterError):
        A.final_infection_level(1.0, 0.0)


def test_half_life():
    assert A.half_life("isolated", p=0.1) == pytest.approx(math.log(2) / 0.1)
    t = A.half_life("er", BASS, lam=3.0)
    assert float(A.er_curve(BASS, 3.0, 2 * t)(t)) == pytest.approx(0.5, abs=1e-6)
    # infinitely many contacts spread fastest
    assert A.half_life("compart", BASS) < A.half_life("dreg", BASS, d=4) < A.half_life("isolated", BASS)
    with pytest.raises(NoCrossingError):
        A.half_life("er", SI, lam=0.5)
    with pytest.raises(ParameterError):
        A.half_life("er", BASS)


@given(p=st.floats(0.0, 0.5), q=st.floats(0.05, 2.0), i0=st.floats(0.0, 0.5),
       lam=st.floats(0.2, 20.0), d=st.integers(2, 30))
@example(p=5e-324, q=1.0, i0=0.0, lam=1.0, d=2)  # subnormal p
@settings(max_examples=30, deadline=None)
def test_curves_are_ordered_and_increasing(p, q, i0, lam, d):
    if p == 0 and i0 == 0:
        i0 = 0.05
    params = SpreadParams(p, q, i0)
    t = np.linspace(0, 20 / (p + q), 41)
    er = A.solve_er(params, lam, t).trajectory.values
    dr = A.solve_dreg(params, d, t).trajectory.values
    compart = A.f_compartmental(params, t).values
    iso = A.f_isolated(t, p, i0)
    tol = 1e-9
    for f in (er, dr):
        assert np.all(np.diff(f) >= -tol)
        assert np.all(f >= iso - tol) and np.all(f <= compart + tol)
    assert np.all(dr >= A.f_1d(t, params) - tol)
