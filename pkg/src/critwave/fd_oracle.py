"""Independent finite-difference cross-check for the physical damped equation.

Solves  phi_tt - phi_rr - 2 phi_r / r + mu phi_t / (t+2) = |phi|^p  (radial,
3-D) on a polar (t, r) grid, as an oracle for the characteristic solver.
The substitution w = r phi absorbs the 2 phi_r / r term exactly:

    w_tt - w_rr + mu w_t / (t+2) = |w|^p r^(1-p),      w(t, 0) = 0,

which is leapfrogged with the damping term time-centred (kept second order)
and the first step taken by Taylor expansion with w_tt from the equation.
phi is reconstructed as w / r away from the axis and by three-point
extrapolation at r = 0.  The outer boundary r_max >= 1 + t_max contains the
light cone of the unit-ball data support, so homogeneous Dirichlet there is
exact.

Also provides the closed-form free evolution of polynomial bump data (the
mu = 0 oracle for this oracle) and the solver-vs-solver comparison used by
the acceptance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .nullgrid import NullField
from .transforms import ProblemParams, RadialProfile

__all__ = [
    "PolarGrid",
    "PolarField",
    "fd_solve",
    "free_bump_wave",
    "compare_solvers",
]


@dataclass(frozen=True)
class PolarGrid:
    dr: float
    dt: float
    r_max: float
    t_max: float
    nr: int = dc_field(init=False)
    nt: int = dc_field(init=False)

    def __post_init__(self) -> None:
        if self.dr <= 0.0 or self.dt <= 0.0:
            raise ValueError("dr and dt must be positive")
        if self.dt > 0.9 * self.dr * (1.0 + 1e-12):
            raise ValueError(
                f"CFL margin violated: dt={self.dt} exceeds 0.9*dr={0.9 * self.dr}"
            )
        if self.r_max < 1.0 + self.t_max - 1e-9:
            raise ValueError(
                f"r_max={self.r_max} must contain the data light cone (>= 1 + t_max = {1.0 + self.t_max})"
            )
        object.__setattr__(self, "nr", int(round(self.r_max / self.dr)))
        object.__setattr__(self, "nt", int(math.ceil(self.t_max / self.dt - 1e-12)))
        if self.nr < 4 or self.nt < 2:
            raise ValueError("polar grid too small")

    def r(self) -> np.ndarray:
        return np.arange(self.nr + 1) * self.dr

    def t(self) -> np.ndarray:
        return np.arange(self.nt + 1) * self.dt


@dataclass
class PolarField:
    grid: PolarGrid
    values: np.ndarray  # phi(t_n, r_i), shape (nt+1, nr+1)
    diverged: bool = False


def _phi_from_w(w: np.ndarray, r: np.ndarray) -> np.ndarray:
    phi = np.zeros_like(w)
    phi[1:] = w[1:] / r[1:]
    # quadratic extrapolation of phi to the axis
    phi[0] = 3.0 * phi[1] - 3.0 * phi[2] + phi[3]
    return phi


def fd_solve(params: ProblemParams, profile: RadialProfile, grid: PolarGrid,
             linear_only: bool = False) -> PolarField:
    """Leapfrog the physical problem; drop the nonlinear source if linear_only."""
    mu, p, eps = params.mu, params.p, params.eps
    dr, dt = grid.dr, grid.dt
    r = grid.r()
    nr, nt = grid.nr, grid.nt
    out = np.zeros((nt + 1, nr + 1))

    def d_rr(w):
        lap = np.zeros_like(w)
        lap[1:-1] = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (dr * dr)
        return lap

    def source(w):
        if linear_only:
            return 0.0
        s = np.zeros_like(w)
        s[1:] = np.abs(w[1:]) ** p * r[1:] ** (1.0 - p)
        return s

    w_prev = r * eps * profile.phi0(r)
    w_t0 = r * eps * profile.phi1(r)
    w_prev[0] = w_prev[-1] = 0.0
    out[0] = _phi_from_w(w_prev, r)

    w_tt0 = d_rr(w_prev) - 0.5 * mu * w_t0 + source(w_prev)
    w_cur = w_prev + dt * w_t0 + 0.5 * dt * dt * w_tt0
    w_cur[0] = w_cur[-1] = 0.0
    out[1] = _phi_from_w(w_cur, r)

    diverged = False
    for n in range(1, nt):
        t_n = n * dt
        a = 0.5 * mu * dt / (t_n + 2.0)
        rhs = d_rr(w_cur) + source(w_cur)
        w_next = (2.0 * w_cur - (1.0 - a) * w_prev + dt * dt * rhs) / (1.0 + a)
        w_next[0] = w_next[-1] = 0.0
        if not np.all(np.isfinite(w_next)):
            diverged = True
            out[n + 1:] = np.nan
            break
        out[n + 1] = _phi_from_w(w_next, r)
        w_prev, w_cur = w_cur, w_next

    return PolarField(grid=grid, values=out, diverged=diverged)


def free_bump_wave(a0: float, a1: float, k: int):
    """Closed-form w(t, r) for w_tt = w_rr on r > 0 with w(t, 0) = 0 and data
    w = a0 r (1-r^2)^k, w_t = a1 r (1-r^2)^k on r <= 1 (d'Alembert with odd
    reflection; the velocity antiderivative is polynomial)."""
    kk = k + 1

    def F(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        y = np.where(inside, 1.0 - x * x, 0.0)
        return a0 * x * y**k

    def Q(x):
        x = np.asarray(x, dtype=float)
        x2 = np.minimum(x * x, 1.0)
        return a1 * (1.0 - (1.0 - x2) ** kk) / (2.0 * kk)

    def w(t, r):
        return 0.5 * (F(r + t) + F(r - t)) + 0.5 * (Q(r + t) - Q(r - t))

    return w


# ---------------------------------------------------------------------------
# solver-vs-solver comparison
# ---------------------------------------------------------------------------

def _interp_null(fld: NullField, t: np.ndarray, r: np.ndarray):
    """Bilinear interpolation of the null field at physical points (t, r).

    Returns (values, valid) where valid marks points whose interpolation cell
    lies entirely inside the triangular domain; cells straddling the initial
    line or the grid edges are skipped rather than polluted with zeros.
    """
    g = fld.grid
    u = 0.5 * (t + 2.0 + r)
    ub = 0.5 * (t + 2.0 - r)
    fi = (u - 0.5) / g.h
    fj = (ub - 0.5) / g.h
    i0 = np.floor(fi).astype(int)
    j0 = np.floor(fj).astype(int)
    valid = (j0 >= 0) & (j0 + 1 <= min(g.j_max, fld.row_count - 1)) \
        & (i0 + 1 <= g.i_max) & (i0 >= 0)
    i0c = np.clip(i0, 0, g.i_max - 1)
    j0c = np.clip(j0, 0, g.j_max - 1)
    n = g.n_unit
    jj = j0c
    start0 = np.maximum(jj, n - jj)
    start1 = np.maximum(jj + 1, n - (jj + 1))
    valid &= (i0c >= start0) & (i0c >= start1)
    wx = fi - i0c
    wy = fj - j0c
    v = fld.values
    vals = ((1 - wx) * (1 - wy) * v[j0c, i0c] + wx * (1 - wy) * v[j0c, i0c + 1]
            + (1 - wx) * wy * v[j0c + 1, i0c] + wx * wy * v[j0c + 1, i0c + 1])
    return vals, valid


def compare_solvers(params: ProblemParams, profile: RadialProfile, t_window: float,
                    linear_only: bool = True, fd_mu_override: float | None = None) -> float:
    """Relative max-norm discrepancy of the physical phi over the overlap
    region {0 <= t <= t_window, 0 <= r <= 1 + t}.

    The characteristic solution is mapped back through phi = r psi and the
    (t+2)^(mu/2) rescaling; the finite-difference grid is matched to the null
    mesh (dr = h, dt = 0.9 h).  The axis column and the first couple of time
    levels are excluded (interpolation cells must not straddle the initial
    line).  fd_mu_override deliberately mismatches the oracle's damping for
    sensitivity tests.
    """
    need_ubar = 0.5 * (t_window + 2.0)
    need_u = 0.5 * (2.0 * t_window + 3.0)
    if params.ubar_max < need_ubar - 1e-9 or params.resolved_u_max < need_u - 1e-9:
        raise ValueError(
            f"null domain too small for t_window={t_window}: need ubar_max >= {need_ubar} "
            f"and u_max >= {need_u}"
        )

    from .char_solver import init_from_data, solve_linear, solve_semilinear

    if linear_only:
        fld = init_from_data(params, profile, source=None)
        rep = solve_linear(params, fld, None, compute_traces=False)
    else:
        rep = solve_semilinear(params, profile)
        fld = rep.field
    if fld.diverged:
        raise RuntimeError("characteristic solve diverged; cannot compare")

    h = params.h
    fd_params = params if fd_mu_override is None else ProblemParams(
        mu=fd_mu_override, p=params.p, eps=params.eps, ubar_max=params.ubar_max,
        h=params.h, blowup_threshold=params.blowup_threshold, u_max=params.u_max)
    r_max = math.ceil((1.0 + t_window) / h + 2) * h
    grid = PolarGrid(dr=h, dt=0.9 * h, r_max=r_max, t_max=t_window)
    pf = fd_solve(fd_params, profile, grid, linear_only=linear_only)
    if pf.diverged:
        raise RuntimeError("finite-difference solve diverged; cannot compare")

    r = grid.r()
    tt = grid.t()
    max_ref = float(np.max(np.abs(pf.values)))
    if max_ref == 0.0:
        return 0.0
    worst = 0.0
    scale_exp = 0.5 * params.mu
    for n, t_n in enumerate(tt):
        if t_n < 2.0 * h or t_n > t_window:
            continue
        mask = (r >= h - 1e-12) & (r <= 1.0 + t_n)
        rs = r[mask]
        if rs.size == 0:
            continue
        vals, valid = _interp_null(fld, np.full_like(rs, t_n), rs)
        phi_char = vals / (rs * (t_n + 2.0) ** scale_exp)
        diff = np.abs(phi_char - pf.values[n, mask])
        if valid.any():
            worst = max(worst, float(np.max(diff[valid])))
    return worst / max_ref
