"""Weighted norms of the null-form solution and numerical inequality verifiers.

The central quantity is the interpolated flux integral

    I_s(ubar) = integral over u of  u^(3s) (u - ubar)^s  phi_u^2  du,

taken from max(ubar, 2 - ubar) to the domain truncation.  s = 0 is the plain
energy flux, s = 1 the Morawetz flux with weight u^3 (u - ubar), and
s = 1/4 + 1/(2p) (with an extra factor 1/2) defines the contraction norm
M(phi)(ubar) of the fixed-point argument.

Quadrature: the solver grid is used directly (no resampling).  Each cell
integrates the (u - ubar)^s factor exactly against a linear interpolant of
phi_u^2 with u^(3s) frozen at the cell midpoint, which degenerates to the
composite trapezoid rule at s = 0 and keeps the endpoint-vanishing weight at
the axis from degrading the order.

Each verifier returns an EstimateVerdict with the left/right-hand sides and
their ratio.  The inequalities carry unnamed absolute constants, so the
verdicts compare against an empirical cap (10 by default; exactly
1 + quadrature tolerance for the Hardy inequality, whose constant is 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .nullgrid import NullField, NullGrid
from .transforms import ProblemParams, RadialProfile, initial_data_scaled

__all__ = [
    "NormTrace",
    "EstimateVerdict",
    "m_norm",
    "energy_norm",
    "morawetz_norm",
    "weighted_flux_norm",
    "m_trace",
    "sup_trace",
    "rhs_norm",
    "data_norm",
    "scaled_data_norms",
    "verify_energy",
    "verify_morawetz",
    "verify_interpolated",
    "verify_hardy",
    "verify_sobolev",
    "random_source",
    "random_test_field",
]

DEFAULT_C_CAP = 10.0
HARDY_QUAD_TOL = 1e-6


@dataclass(frozen=True)
class NormTrace:
    """A function ubar -> value sampled on grid lines."""

    ubar_values: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self) -> None:
        if self.ubar_values.shape != self.values.shape:
            raise ValueError("trace coordinate and value arrays must match")
        if self.ubar_values.size > 1 and np.any(np.diff(self.ubar_values) <= 0.0):
            raise ValueError("trace ubar values must be strictly increasing")


@dataclass(frozen=True)
class EstimateVerdict:
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    c_cap: float
    label: str = ""


def _verdict(lhs: float, rhs: float, c_cap: float, label: str) -> EstimateVerdict:
    if rhs == 0.0:
        ratio = 0.0 if abs(lhs) <= 1e-12 else math.inf
    else:
        ratio = lhs / rhs
    return EstimateVerdict(lhs=lhs, rhs=rhs, ratio=ratio,
                           passed=bool(ratio <= c_cap), c_cap=c_cap, label=label)


# ---------------------------------------------------------------------------
# quadrature core
# ---------------------------------------------------------------------------

def _weighted_line_integral(u: np.ndarray, g: np.ndarray, ubar: float, s: float) -> float:
    """integral of u^(3s) (u-ubar)^s g du over the line, g piecewise linear."""
    if u.size < 2:
        return 0.0
    if s == 0.0:
        return float(np.trapezoid(g, u))
    h = u[1] - u[0]
    v = u - ubar
    va, vb = v[:-1], v[1:]
    p1 = (vb ** (s + 1.0) - va ** (s + 1.0)) / (s + 1.0)
    p2 = (vb ** (s + 2.0) - va ** (s + 2.0)) / (s + 2.0)
    ga, gb = g[:-1], g[1:]
    umid = 0.5 * (u[:-1] + u[1:])
    cells = umid ** (3.0 * s) * (ga * p1 + (gb - ga) / h * (p2 - va * p1))
    return float(np.sum(cells))


def _flux_integral(fld: NullField, j: int, s: float) -> float:
    g = fld.grid
    i0 = g.i_start(j)
    u = g.line_u(j)
    du = fld.phi_u[j, i0:]
    return _weighted_line_integral(u, du * du, float(g.ubar(j)), s)


def weighted_flux_norm(fld: NullField, ubar: float, s: float) -> float:
    """( integral of u^(3s) (u-ubar)^s phi_u^2 du )^(1/2) on one grid line."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    j = fld.j_of_ubar(ubar)
    return math.sqrt(max(_flux_integral(fld, j, s), 0.0))


def energy_norm(fld: NullField, ubar: float) -> float:
    """Plain energy flux (integral of phi_u^2 du)^(1/2)."""
    return weighted_flux_norm(fld, ubar, 0.0)


def morawetz_norm(fld: NullField, ubar: float) -> float:
    """Morawetz flux (integral of u^3 (u-ubar) phi_u^2 du)^(1/2)."""
    return weighted_flux_norm(fld, ubar, 1.0)


def interpolation_exponent(p: float) -> float:
    return 0.25 + 1.0 / (2.0 * p)


def m_norm(fld: NullField, p: float, ubar: float) -> float:
    """Contraction norm M(phi)(ubar) with s = 1/4 + 1/(2p) and a 1/2 factor."""
    j = fld.j_of_ubar(ubar)
    return math.sqrt(max(0.5 * _flux_integral(fld, j, interpolation_exponent(p)), 0.0))


def m_trace(fld: NullField, p: float, j_stop: int | None = None) -> NormTrace:
    """M(phi) on every completed grid line (lines past j_stop are excluded)."""
    g = fld.grid
    s = interpolation_exponent(p)
    jj = min(g.j_max + 1 if j_stop is None else j_stop, fld.row_count)
    vals = np.array([math.sqrt(max(0.5 * _flux_integral(fld, j, s), 0.0))
                     for j in range(jj)])
    return NormTrace(ubar_values=np.asarray(g.ubar(np.arange(jj)), dtype=float),
                     values=vals, label="M(phi)")


def sup_trace(fld: NullField, p: float, j_stop: int | None = None) -> NormTrace:
    """sup over u of u^(1/p) |phi| on every completed grid line."""
    g = fld.grid
    jj = min(g.j_max + 1 if j_stop is None else j_stop, fld.row_count)
    vals = np.empty(jj)
    for j in range(jj):
        i0 = g.i_start(j)
        u = g.line_u(j)
        row = fld.values[j, i0:]
        vals[j] = float(np.max(u ** (1.0 / p) * np.abs(row))) if row.size else 0.0
    return NormTrace(ubar_values=np.asarray(g.ubar(np.arange(jj)), dtype=float),
                     values=vals, label="sup_u u^(1/p)|phi|")


# ---------------------------------------------------------------------------
# data and source norms
# ---------------------------------------------------------------------------

_DATA_QUAD_POINTS = 4097


def scaled_data_norms(profile: RadialProfile, mu: float) -> tuple[float, float]:
    """(H1(R^3) norm of psi0)^2 and (L2(R^3) norm of psi1)^2 at unit amplitude,
    with the radial measure 4 pi r^2 dr."""
    r = np.linspace(0.0, 1.0, _DATA_QUAD_POINTS)
    psi0, psi1 = initial_data_scaled(profile, 1.0, mu, r)
    dpsi0 = 2.0 ** (0.5 * mu) * profile.phi0_d1(r)
    w = 4.0 * math.pi * r * r
    h1_sq = float(simpson((psi0 * psi0 + dpsi0 * dpsi0) * w, x=r))
    l2_sq = float(simpson(psi1 * psi1 * w, x=r))
    return h1_sq, l2_sq


def data_norm(profile: RadialProfile, eps: float, mu: float) -> float:
    """eps ( |psi0|_{H1}^2 + |psi1|_{L2}^2 )^(1/2) of the scaled data."""
    h1_sq, l2_sq = scaled_data_norms(profile, mu)
    return eps * math.sqrt(h1_sq + l2_sq)


def rhs_norm(G, grid: NullGrid, s: float, ubar_max: float | None = None) -> float:
    """Outer integral over ubar of the weighted inner L2 norm of the source:
    integral d(ubar) of ( integral u^(3s)(u-ubar)^s G^2 du )^(1/2)."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if G is None:
        return 0.0
    top = grid.ubar_max if ubar_max is None else min(ubar_max, grid.ubar_max)
    j_top = round((top - 0.5) / grid.h)
    ub = np.asarray(grid.ubar(np.arange(j_top + 1)), dtype=float)
    inner = np.empty(j_top + 1)
    for j in range(j_top + 1):
        u = grid.line_u(j)
        gv = np.asarray(G(u, float(ub[j])), dtype=float)
        inner[j] = math.sqrt(max(_weighted_line_integral(u, gv * gv, float(ub[j]), s), 0.0))
    return float(np.trapezoid(inner, ub))


# ---------------------------------------------------------------------------
# lemma verifiers
# ---------------------------------------------------------------------------

def verify_interpolated(params: ProblemParams, profile: RadialProfile, G, s: float,
                        fld: NullField | None = None,
                        c_cap: float = DEFAULT_C_CAP) -> EstimateVerdict:
    """Interpolated weighted flux estimate at exponent s in [0, 1]:

        sup_ubar flux_s(solution)  <=  C ( data_norm + rhs_norm_s(G) ).

    Runs the linear solve for (data, G) unless a solved field is supplied.
    s = 0 and s = 1 reproduce the energy and Morawetz verdicts exactly.
    """
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    if fld is None:
        from .char_solver import init_from_data, solve_linear

        fld = init_from_data(params, profile, source=G if callable(G) else None)
        solve_linear(params, fld, G, compute_traces=False)
    lhs = max(math.sqrt(max(_flux_integral(fld, j, s), 0.0))
              for j in range(min(fld.grid.j_max + 1, fld.row_count)))
    rhs = data_norm(profile, params.eps, params.mu) + rhs_norm(G, fld.grid, s)
    return _verdict(lhs, rhs, c_cap, label=f"interpolated(s={s:g})")


def verify_energy(params: ProblemParams, profile: RadialProfile, G=None,
                  fld: NullField | None = None,
                  c_cap: float = DEFAULT_C_CAP) -> EstimateVerdict:
    """Energy estimate: sup_ubar of the plain flux against data plus source."""
    v = verify_interpolated(params, profile, G, 0.0, fld=fld, c_cap=c_cap)
    return EstimateVerdict(v.lhs, v.rhs, v.ratio, v.passed, v.c_cap, label="energy")


def verify_morawetz(params: ProblemParams, profile: RadialProfile, G=None,
                    fld: NullField | None = None,
                    c_cap: float = DEFAULT_C_CAP) -> EstimateVerdict:
    """Morawetz estimate: weight u^3 (u - ubar) on both sides."""
    v = verify_interpolated(params, profile, G, 1.0, fld=fld, c_cap=c_cap)
    return EstimateVerdict(v.lhs, v.rhs, v.ratio, v.passed, v.c_cap, label="morawetz")


def verify_hardy(fld: NullField, ubar: float,
                 quad_tol: float = HARDY_QUAD_TOL) -> EstimateVerdict:
    """Hardy-type inequality on one line (constant exactly 1):

        integral phi^2 u du  <=  -u0^2 phi(u0)^2 + integral u^3 phi_u^2 du,

    u0 the lower limit.  The boundary term uses the field value there; on the
    initial segment it equals the -(r^2 (r+2)^2 / 4) psi0^2 data term, and it
    vanishes for fields that vanish at the lower limit (axis lines included).
    """
    j = fld.j_of_ubar(ubar)
    g = fld.grid
    i0 = g.i_start(j)
    u = g.line_u(j)
    phi = fld.values[j, i0:]
    du = fld.phi_u[j, i0:]
    lhs = float(np.trapezoid(phi * phi * u, u))
    boundary = -(u[0] ** 2) * float(phi[0]) ** 2
    rhs = boundary + float(np.trapezoid(u ** 3 * du * du, u))
    return _verdict(lhs, rhs, 1.0 + quad_tol, label="hardy")


def verify_sobolev(fld: NullField, p: float, ubar: float,
                   profile: RadialProfile | None = None, eps: float | None = None,
                   mu: float | None = None,
                   c_cap: float = DEFAULT_C_CAP) -> EstimateVerdict:
    """Pointwise weighted bound sup_u u^(2/p) phi^2 <= C M(phi)^2 (+ data term).

    For lines below the data corner (ubar <= 1) the right-hand side carries
    the boundary contribution (1-ubar)^(3-s) psi0^2(2-2 ubar); pass the
    profile (with eps, mu) to include it, or omit it to ablate the term.
    """
    j = fld.j_of_ubar(ubar)
    g = fld.grid
    i0 = g.i_start(j)
    u = g.line_u(j)
    phi = fld.values[j, i0:]
    lhs = float(np.max(u ** (2.0 / p) * phi * phi)) if phi.size else 0.0
    s = interpolation_exponent(p)
    rhs = 0.5 * _flux_integral(fld, j, s)
    if ubar < 1.0 and profile is not None:
        rb = 2.0 - 2.0 * ubar
        psi0b, _ = initial_data_scaled(profile, eps, mu, rb)
        rhs += (1.0 - ubar) ** (3.0 - s) * float(psi0b) ** 2
    return _verdict(lhs, max(rhs, 0.0), c_cap, label="sobolev")


# ---------------------------------------------------------------------------
# random fixtures for the verifier suites
# ---------------------------------------------------------------------------

def _kernel(x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < 1.0
    y = np.where(inside, 1.0 - x * x, 0.0)
    return y * y * y


def _kernel_d(x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < 1.0
    y = np.where(inside, 1.0 - x * x, 0.0)
    return -6.0 * x * y * y


def random_source(grid: NullGrid, rng: np.random.Generator, n_bumps: int = 3):
    """Smooth random source G(u, ubar): a sum of compact C^2 product bumps."""
    terms = []
    for _ in range(n_bumps):
        v = rng.uniform(0.4, 1.2)
        d = rng.uniform(0.5, grid.ubar_max)
        w = rng.uniform(0.4, 1.2)
        c = rng.uniform(1.0, max(grid.u_max - 0.5, 1.5))
        amp = rng.uniform(-1.0, 1.0)
        terms.append((amp, c, w, d, v))

    def G(u, ubar):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        for amp, c, w, d, v in terms:
            total += amp * _kernel((u - c) / w) * _kernel((ubar - d) / v)
        return total

    return G


def random_test_field(grid: NullGrid, rng: np.random.Generator,
                      n_bumps: int = 4) -> NullField:
    """Random smooth compactly supported field with an analytic phi_u cache.

    Bump supports are kept strictly right of the axis u = ubar and above the
    initial line u + ubar = 2, so the field vanishes at the lower limit of
    every grid line (the Hardy verifier's hypothesis).
    """
    terms = []
    for _ in range(n_bumps):
        v = rng.uniform(0.3, 1.0)
        d = rng.uniform(0.5, grid.ubar_max)
        lo_u = max(d + v, 2.0 - (d - v)) + 0.1
        hi_u = grid.u_max - 0.1
        if hi_u - lo_u < 0.8:
            continue
        w = rng.uniform(0.3, min(1.2, 0.5 * (hi_u - lo_u)))
        c = rng.uniform(lo_u + w, hi_u - w)
        amp = rng.uniform(-1.0, 1.0)
        terms.append((amp, c, w, d, v))
    if not terms:
        raise ValueError("grid too small to place any random bump")

    def f(u, ubar):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        for amp, c, w, d, v in terms:
            total += amp * _kernel((u - c) / w) * _kernel((ubar - d) / v)
        return total

    def dfdu(u, ubar):
        u = np.asarray(u, dtype=float)
        total = np.zeros_like(u)
        for amp, c, w, d, v in terms:
            total += amp / w * _kernel_d((u - c) / w) * _kernel((ubar - d) / v)
        return total

    return NullField.from_function(grid, f, dfdu=dfdu)
