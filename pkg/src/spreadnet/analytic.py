"""Closed forms and ODE solutions for the expected adoption level.

The ER and d-regular results reduce to scalar ODEs for an auxiliary
function ``y(t)``; they are integrated with an adaptive Dormand-Prince 8(5,3)
pair whose dense output is evaluated on the requested grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from .errors import NoCrossingError, ParameterError
from .network import SpreadParams, Trajectory, check_grid

RTOL = 1e-12
ATOL = 1e-14
LAMBDA_SWITCH = 50.0
ROOT_XTOL = 1e-13


def _integrate(rhs, y0: float, t_end: float):
    """Dense solution on [0, t_end] of a scalar ODE."""
    sol = solve_ivp(rhs, (0.0, max(t_end, 1e-12)), [y0], method="DOP853",
                    rtol=RTOL, atol=ATOL, dense_output=True)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.sol


# --------------------------------------------------------------------------- ER


def _er_rhs_y(params: SpreadParams, lam: float):
    p, q, i0 = params.p, params.q, params.i0

    def rhs(t, y):
        return (q / lam) * (-y + (1 - i0) * np.exp(-p * t - lam * (1 - y)))
    return rhs


def _er_rhs_z(params: SpreadParams, lam: float):
    p, q, i0 = params.p, params.q, params.i0

    def rhs(t, z):
        return -q * (z / lam - 1 + (1 - i0) * np.exp(-p * t - z))
    return rhs


@dataclass(frozen=True, eq=False)
class ErSolution:
    """Expected adoption level on sparse ER networks and its auxiliary ``y``.

    ``z = lam * (1 - y)`` is kept as well; at large ``lam`` it is the
    integrated variable.
    """

    trajectory: Trajectory
    y: np.ndarray
    z: np.ndarray
    lam: float
    form: str


def _er_dense(params: SpreadParams, lam: float, t_end: float, form: str):
    """Callable t -> z(t) for the ER model."""
    if form == "y":
        dense = _integrate(_er_rhs_y(params, lam), 1.0, t_end)
        return lambda t: lam * (1 - dense(t)[0])
    dense = _integrate(_er_rhs_z(params, lam), 0.0, t_end)
    return lambda t: dense(t)[0]


def _pick_form(lam: float, form: str) -> str:
    if form == "auto":
        return "y" if lam <= LAMBDA_SWITCH else "z"
    if form not in ("y", "z"):
        raise ParameterError(f"form must be 'auto', 'y' or 'z', got {form!r}")
    return form


def solve_er(params: SpreadParams, lam: float, grid, form: str = "auto") -> ErSolution:
    """Expected adoption level on infinite sparse ER networks with mean degree ``lam``.

    ``f(t) = 1 - (1 - i0) exp(-p t - lam (1 - y))`` where ``y`` solves
    ``y' = (q/lam) (-y + (1 - i0) exp(-p t - lam (1 - y)))``, ``y(0) = 1``.
    For ``lam`` above ``LAMBDA_SWITCH`` the equivalent ODE for ``z = lam (1 - y)``
    is integrated instead.
    """
    if not lam > 0:
        raise ParameterError(f"lambda must be > 0, got {lam} (use f_isolated for lambda = 0)")
    grid = check_grid(grid)
    form = _pick_form(lam, form)
    z = _er_dense(params, lam, grid[-1], form)(grid)
    z[0] = 0.0
    y = 1 - z / lam
    f = params.i0 - (1 - params.i0) * np.expm1(-params.p * grid - z)
    return ErSolution(Trajectory(grid, f), y, z, float(lam), form)


def er_curve(params: SpreadParams, lam: float, t_end: float, form: str = "auto") -> Callable:
    """Continuous f^ER on [0, t_end] (dense interpolant)."""
    zf = _er_dense(params, lam, t_end, _pick_form(lam, form))
    return lambda t: 1 - (1 - params.i0) * np.exp(-params.p * np.asarray(t) - zf(t))


# -------------------------------------------------------------------- d-regular


@dataclass(frozen=True, eq=False)
class DregSolution:
    """Expected adoption level on infinite random d-regular networks.

    ``y`` is the susceptibility of a node with all but one of its edges
    removed; the full susceptibility is ``(y / B)**(d-1) * y`` with
    ``B = exp(-p t) (1 - i0)``.
    """

    trajectory: Trajectory
    y: np.ndarray
    susceptible: np.ndarray
    d: int
    residual: float


def _dreg_ratio_rhs(params: SpreadParams, d: int):
    p, q, i0 = params.p, params.q, params.i0

    # u = y / B stays in (0, 1]; y itself can fall below any absolute
    # tolerance long before B does
    def rhs(t, u):
        base = np.exp(-p * t) * (1 - i0)
        return (q / d) * (-u + base * u ** (d - 1))
    return rhs


def _dreg_dense(params: SpreadParams, d: int, t_end: float):
    return _integrate(_dreg_ratio_rhs(params, d), 1.0, t_end)


def _base(params: SpreadParams, t):
    return np.exp(-params.p * np.asarray(t)) * (1 - params.i0)


def dreg_direct_rhs(params: SpreadParams, d: int, t, s):
    """Right-hand side of the closed ODE for the susceptibility on d-regular networks."""
    base = _base(params, t)
    return -s * (params.p + params.q * (1 - (s / base) ** (-2.0 / d) * s))


def solve_dreg(params: SpreadParams, d: int, grid) -> DregSolution:
    """Expected adoption level on infinite random d-regular networks.

    Solves ``y' + (p + q/d) y = (q/d) B^{-(d-3)} y^{d-1}``, ``y(0) = 1 - i0``,
    maps to the susceptibility ``S = B^{-(d-1)} y^d`` and ``f = 1 - S``.  The
    ODE is integrated for the ratio ``u = y / B``, which obeys
    ``u' = (q/d)(B u^{d-1} - u)``, ``u(0) = 1``.  The ``residual`` field is the
    largest mismatch between ``dS/dt`` obtained via the chain rule and the
    direct ODE in ``S``.
    """
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    grid = check_grid(grid)
    u = _dreg_dense(params, d, grid[-1])(grid)[0]
    u[0] = 1.0
    base = _base(params, grid)
    s = base * u ** d
    du = _dreg_ratio_rhs(params, d)(grid, u)
    ds_chain = -params.p * s + d * base * u ** (d - 1) * du
    ok = s > 1e-250
    residual = float(np.max(np.abs(ds_chain - dreg_direct_rhs(params, d, grid, s))[ok], initial=0.0))
    return DregSolution(Trajectory(grid, 1 - s), base * u, s, int(d), residual)


def dreg_curve(params: SpreadParams, d: int, t_end: float) -> Callable:
    dense = _dreg_dense(params, d, t_end)
    return lambda t: 1 - _base(params, t) * dense(t)[0] ** d


# ------------------------------------------------------------- simple limits


def f_isolated(t, p: float, i0: float = 0.0):
    """Adoption level of isolated nodes: ``i0 + (1 - i0)(1 - exp(-p t))``."""
    if p < 0:
        raise ParameterError("p must be >= 0")
    t = np.asarray(t, dtype=float)
    return i0 - (1 - i0) * np.expm1(-p * t)


def f_compartmental_closed(t, p: float, q: float):
    """Closed-form compartmental Bass curve for i0 = 0 (needs p > 0)."""
    if not p > 0:
        raise ParameterError("the closed form needs p > 0")
    t = np.asarray(t, dtype=float)
    e = np.exp(-(p + q) * t)
    return -np.expm1(-(p + q) * t) / (1 + (q / p) * e)


def _compart_dense(params: SpreadParams, t_end: float):
    p, q = params.p, params.q
    return _integrate(lambda t, f: (1 - f) * (p + q * f), params.i0, t_end)


def f_compartmental(params: SpreadParams, grid) -> Trajectory:
    """Mean-field curve ``f' = (1 - f)(p + q f)``, ``f(0) = i0``, integrated on ``grid``."""
    grid = check_grid(grid)
    f = _compart_dense(params, grid[-1])(grid)[0]
    f[0] = params.i0
    return Trajectory(grid, f)


def f_1d(t, params: SpreadParams):
    """Adoption level on infinite lines/circles (and 2-regular networks)."""
    p, q, i0 = params.p, params.q, params.i0
    t = np.asarray(t, dtype=float)
    # (1 - e^{-pt}) / p written as t phi(pt); the series avoids 0/0 for tiny p
    x = p * t
    safe = np.where(x > 1e-8, x, 1.0)
    phi = np.where(x > 1e-8, -np.expm1(-safe) / safe, 1 - x / 2)
    return 1 - (1 - i0) * np.exp(-(p + q) * t + q * (1 - i0) * t * phi)


# --------------------------------------------------------------- fixed points


def final_infection_level(lam: float, i0: float) -> float:
    """Final SI infection level on sparse ER: root in (0, 1) of ``f = 1 - (1 - i0) e^{-lam f}``."""
    if not lam > 0:
        raise ParameterError("lambda must be > 0")
    if not 0 < i0 < 1:
        raise ParameterError(f"i0 must lie in (0, 1), got {i0}")

    def g(f):
        return f - 1 + (1 - i0) * math.exp(-lam * f)

    return bisect(g, 0.0, 1.0, xtol=ROOT_XTOL, maxiter=200)


def ysi_infinity(lam: float, i0: float) -> float:
    """Limit of the SI auxiliary function: root in (0, 1) of ``h(y) = -y + (1 - i0) e^{-lam (1 - y)}``."""
    if not lam > 0:
        raise ParameterError("lambda must be > 0")
    if not 0 < i0 < 1:
        raise ParameterError(f"i0 must lie in (0, 1), got {i0}")

    def h(y):
        return -y + (1 - i0) * math.exp(-lam * (1 - y))

    return bisect(h, 0.0, 1.0, xtol=ROOT_XTOL, maxiter=200)


def giant_component(lam: float) -> float:
    """Giant-component fraction of sparse ER graphs: positive root of ``X = 1 - e^{-lam X}``."""
    if lam < 0:
        raise ParameterError("lambda must be >= 0")
    if lam <= 1:
        return 0.0

    def g(x):
        return x + math.expm1(-lam * x)

    lo = 1e-15
    if g(lo) >= 0:  # lam within rounding of 1
        return 0.0
    return bisect(g, lo, 1.0, xtol=ROOT_XTOL, maxiter=200)


# ----------------------------------------------------------------- half-life


def half_life_tmax(p: float, q: float, i0: float) -> float:
    return 1e3 / (p + q * max(i0, p / (p + q)))


def _first_crossing(fn: Callable, t_max: float, level: float, n: int = 4001) -> float:
    ts = np.linspace(0.0, t_max, n)
    vals = np.asarray(fn(ts), dtype=float)
    above = np.flatnonzero(vals >= level)
    if above.size == 0:
        raise NoCrossingError(f"curve stays below {level} up to t = {t_max:g}")
    k = above[0]
    if k == 0:
        return 0.0
    lo, hi = ts[k - 1], ts[k]
    # bisect until the bracket pins f to 1e-6 (time resolution much finer)
    while hi - lo > 1e-9 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if float(np.asarray(fn(mid))) >= level:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def half_life(solver: str, params: SpreadParams = None, *, p: float = None, q: float = None,
              i0: float = 0.0, lam: float = None, d: int = None, level: float = 0.5) -> float:
    """First time the expected adoption level reaches ``level`` (default 1/2).

    ``solver`` is one of ``er``, ``dreg``, ``compart`` or ``isolated``.
    Raises :class:`NoCrossingError` if the curve never gets there.
    """
    if params is not None:
        p, q, i0 = params.p, params.q, params.i0
    if p is None:
        raise ParameterError("p is required")
    if solver == "isolated":
        if i0 >= level:
            return 0.0
        if p == 0:
            raise NoCrossingError("isolated nodes never adopt when p = 0")
        return math.log((1 - i0) / (1 - level)) / p
    params = SpreadParams(p, q, i0)
    t_max = half_life_tmax(p, q, i0)
    if solver == "er":
        if lam is None:
            raise ParameterError("lam is required for the ER half-life")
        if p == 0 and final_infection_level(lam, i0) <= level:
            raise NoCrossingError(f"final infection level is below {level}")
        fn = er_curve(params, lam, t_max)
    elif solver == "dreg":
        if d is None:
            raise ParameterError("d is required for the d-regular half-life")
        fn = dreg_curve(params, d, t_max)
    elif solver == "compart":
        dense = _compart_dense(params, t_max)
        fn = lambda t: dense(t)[0]  # noqa: E731
    else:
        raise ParameterError(f"unknown solver {solver!r}")
    return _first_crossing(fn, t_max, level)


def half_life_compartmental_closed(p: float, q: float) -> float:
    """Inverse of the i0 = 0 compartmental closed form at 1/2: ``ln(2 + q/p) / (p + q)``."""
    return math.log(2 + q / p) / (p + q)
