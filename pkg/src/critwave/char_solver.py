"""Characteristic-rectangle solver for the reduced null-form equation.

The unknown phi(u, ubar) satisfies  phi_uubar + V phi = G  on the triangular
domain { ubar in [1/2, ubar_max], u in [max(ubar, 2-ubar), u_max] }, with
phi = 0 on ubar = 1/2 (finite propagation speed), phi = 0 on the axis
u = ubar, and Cauchy data on the initial segment u + ubar = 2.

Each interior node closes its characteristic rectangle with the
second-order update

    phi(u,ub) = phi(u-h,ub) + phi(u,ub-h) - phi(u-h,ub-h)
                + h^2 [G - V phi]  at the rectangle midpoint,

where the midpoint phi in the V term is the average of the four corners,
so the unknown corner appears on both sides and the update is solved in
closed form (semi-implicit; unconditionally stable since V >= 0).  Along a
u-line this is a first-order linear recurrence, marched as a vectorised
cumulative-product scan.  At mu = 2 the potential vanishes identically and
the scan degenerates to the plain free null-form integrator (cumulative sum
of the source), bit-for-bit.

Three modes: linear (G given), direct semilinear (G = |phi|^p weighted,
predictor plus one corrector pass per node), and Picard iteration of the
linear solver against the previous iterate's source.  The nonlinear source
is only ever evaluated at rectangle midpoints, where u - ubar >= h/2, never
on the axis itself; phi vanishes linearly there so the weighted source stays
finite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .nullgrid import NullField, NullGrid
from .transforms import NullPoint, ProblemParams, RadialProfile, initial_data_scaled
from . import estimates

__all__ = [
    "SolveStatus",
    "SolveReport",
    "init_from_data",
    "solve_linear",
    "solve_semilinear",
    "picard_solve",
    "blowup_scan",
]

# Completed solves must show a decayed flux derivative at the u truncation;
# otherwise the domain is enlarged (bounded retries) before reporting.
TAIL_AUDIT_TOL = 1e-3
_TAIL_RETRIES = 2


class SolveStatus(Enum):
    COMPLETED_WINDOW = "global_window"
    BLOW_UP = "blowup"
    DIVERGED = "diverged"


@dataclass
class SolveReport:
    """Outcome of one run: status, norm traces, and iteration diagnostics."""

    status: SolveStatus
    m_trace: "estimates.NormTrace | None" = None
    sup_trace: "estimates.NormTrace | None" = None
    t_star: float | None = None
    location: NullPoint | None = None
    picard_deltas: list[float] = dc_field(default_factory=list)
    wall_time: float = 0.0
    non_contraction: bool = False
    tail_audit_ratio: float | None = None
    field: NullField | None = None

    @property
    def status_label(self) -> str:
        return self.status.value

    @property
    def sup_m(self) -> float:
        if self.m_trace is None or self.m_trace.values.size == 0:
            return 0.0
        return float(np.max(self.m_trace.values))

    def picard_ratios(self) -> list[float]:
        d = self.picard_deltas
        return [d[k] / d[k - 1] for k in range(1, len(d)) if d[k - 1] > 0.0]


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def init_from_data(params: ProblemParams, profile: RadialProfile, source="semilinear",
                   grid: NullGrid | None = None, lazy: bool = False) -> NullField:
    """Populate the two layers adjacent to the initial segment u + ubar = 2.

    Layer one (t = 0) carries phi = r * psi0-scaled directly.  Layer two
    (t = h) is a Taylor start of local order three,

        phi = r psi0 + h r psi1 + (h^2/2) (phi_rr - V phi + G)|_{t=0},

    using the transverse derivative from psi1-scaled and the equation itself
    for the second time derivative.  `source` selects the G used there: the
    problem's own nonlinearity ("semilinear", default), a callable G(u, ubar)
    for linear runs with a known source, or None for G = 0.  The line
    ubar = 1/2 and all axis nodes stay exactly zero.
    """
    if grid is None:
        grid = NullGrid.from_params(params)
    fld = NullField(grid, rows=grid.data_j_max + 2 if lazy else None)
    h = grid.h
    n = grid.n_unit
    mu, p, eps = params.mu, params.p, params.eps
    pow_half = 2.0 ** (0.5 * mu)
    v0 = mu * (2.0 - mu) / 16.0  # potential on the initial line, (u+ubar) = 2

    for j in range(1, grid.data_j_max + 1):
        i1 = n - j
        r1 = (i1 - j) * h
        psi0, psi1 = initial_data_scaled(profile, eps, mu, r1)
        fld.values[j, i1] = r1 * psi0

        i2 = n - j + 1
        if i2 > grid.i_max:
            continue
        r2 = (i2 - j) * h
        psi0b, psi1b = initial_data_scaled(profile, eps, mu, r2)
        phi0v = r2 * psi0b
        phi_t = r2 * psi1b
        # d^2/dr^2 (r psi0) = 2 psi0' + r psi0''
        dpsi0 = pow_half * eps * profile.phi0_d1(r2)
        d2psi0 = pow_half * eps * profile.phi0_d2(r2)
        phi_rr = 2.0 * dpsi0 + r2 * d2psi0
        if source == "semilinear":
            g0 = r2 * abs(psi0b) ** p * 2.0 ** (-0.5 * mu * (p - 1.0))
        elif callable(source):
            g0 = float(np.asarray(source(np.array([1.0 + 0.5 * r2]), 1.0 - 0.5 * r2)).reshape(-1)[0])
        elif source is None:
            g0 = 0.0
        else:
            raise ValueError(f"unknown Taylor source {source!r}")
        phi_tt = phi_rr - v0 * phi0v + g0
        fld.values[j, i2] = phi0v + h * phi_t + 0.5 * h * h * phi_tt
    return fld


# ---------------------------------------------------------------------------
# marching cores
# ---------------------------------------------------------------------------

def _march_linear(params: ProblemParams, fld: NullField, G=None,
                  source_field: NullField | None = None) -> None:
    """March the semi-implicit linear update over the whole grid, in place.

    With a `source_field`, G is the problem nonlinearity evaluated at
    rectangle midpoints of that (frozen) field -- one Picard sweep.
    """
    g = fld.grid
    h = g.h
    h2 = h * h
    mu, p = params.mu, params.p
    vcoef = mu * (2.0 - mu) / 4.0
    mexp = -0.5 * mu * (p - 1.0)
    vals = fld.values
    src = source_field.values if source_field is not None else None

    for j in range(1, g.j_max + 1):
        fc = g.first_marchable(j)
        if fc > g.i_max:
            continue
        ub_mid = float(g.ubar(j)) - 0.5 * h
        u_mid = g.u(np.arange(fc, g.i_max + 1)) - 0.5 * h
        q = 0.25 * h2 * vcoef / ((u_mid + ub_mid) ** 2)

        phi_a = vals[j - 1, fc - 1:g.i_max]
        phi_b = vals[j - 1, fc:g.i_max + 1]
        anchor = vals[j, fc - 1]

        if src is not None:
            mid = 0.25 * (src[j - 1, fc - 1:g.i_max] + src[j - 1, fc:g.i_max + 1]
                          + src[j, fc - 1:g.i_max] + src[j, fc:g.i_max + 1])
            gv = np.abs(mid) ** p * (u_mid - ub_mid) ** (1.0 - p) * (u_mid + ub_mid) ** mexp
        elif G is not None:
            gv = np.asarray(G(u_mid, ub_mid), dtype=float)
        else:
            gv = 0.0

        c1 = (1.0 - q) / (1.0 + q)
        c0 = (phi_b * (1.0 - q) - phi_a * (1.0 + q) + h2 * gv) / (1.0 + q)
        prod = np.cumprod(c1)
        x = prod * (anchor + np.cumsum(c0 / prod))
        vals[j, fc:] = x
        if not np.all(np.isfinite(x)):
            bad = int(np.argmin(np.isfinite(x)))
            fld.diverged = True
            fld.first_failure = NullPoint(float(g.u(fc + bad)), float(g.ubar(j)))
            return
    fld.invalidate_cache()


def _march_semilinear(params: ProblemParams, fld: NullField):
    """Direct nonlinear march with per-node predictor / one-corrector source.

    When a node exceeds the blow-up threshold its line is cut there and the
    march continues underneath the forming singular front (each later line
    ends strictly left of the cut, staying inside the maximal garbage-free
    development), until no remaining node can carry a smaller time than the
    best crossing found.  Scanning stops being useful once 2 ubar - 2
    exceeds that time, since t >= 2 ubar - 2 everywhere on a line.

    Returns (kind, location, value, first_cut_j): kind None on completion,
    "blowup" with the minimal-t threshold crossing, or "diverged" on NaN
    before any crossing; first_cut_j is the first line that was cut (lines
    below it are complete).
    """
    g = fld.grid
    h = g.h
    h2 = h * h
    mu, p = params.mu, params.p
    thr = params.blowup_threshold
    vcoef = mu * (2.0 - mu) / 4.0
    mexp = -0.5 * mu * (p - 1.0)

    best_t = math.inf
    best = None  # (i, j, value)
    first_cut_j = None
    limit = g.i_max  # last valid index of the previous line

    for j in range(1, g.j_max + 1):
        ub = float(g.ubar(j))
        if 2.0 * ub - 2.0 > best_t:
            break
        fc = g.first_marchable(j)
        end = limit  # rectangle needs (i, j-1), so stay within the previous line
        if fc > end:
            break
        fld.ensure_rows(j)
        vals = fld.values
        ub_mid = ub - 0.5 * h
        u_mid = g.u(np.arange(fc, end + 1)) - 0.5 * h
        q_arr = (0.25 * h2 * vcoef / ((u_mid + ub_mid) ** 2)).tolist()
        w_arr = ((u_mid - ub_mid) ** (1.0 - p) * (u_mid + ub_mid) ** mexp).tolist()
        a_arr = vals[j - 1, fc - 1:end].tolist()
        b_arr = vals[j - 1, fc:end + 1].tolist()
        out = [0.0] * len(b_arr)
        c = float(vals[j, fc - 1])
        cut = None

        for k in range(len(out)):
            a = a_arr[k]
            b = b_arr[k]
            qk = q_arr[k]
            wk = w_arr[k]
            one_m = 1.0 - qk
            denom = 1.0 + qk
            base = (b + c) * one_m - a * denom
            try:
                # predictor: extrapolated corner b + c - a makes the midpoint
                # average collapse to (b + c)/2
                gm = abs((b + c) * 0.5) ** p * wk
                x = (base + h2 * gm) / denom
                gm = abs((a + b + c + x) * 0.25) ** p * wk
                x = (base + h2 * gm) / denom
            except OverflowError:
                x = math.inf
            if x > thr or -x > thr:
                i_abs = fc + k
                t_here = float(g.u(i_abs)) + ub - 2.0
                if t_here < best_t:
                    best_t = t_here
                    best = (i_abs, j, x)
                cut = k
                break
            if x != x:  # NaN before any threshold crossing: scheme breakdown
                if best is None:
                    vals[j, fc:fc + len(out)] = out
                    fld.invalidate_cache()
                    loc = NullPoint(float(g.u(fc + k)), ub)
                    fld.diverged = True
                    fld.first_failure = loc
                    return "diverged", loc, x, j
                cut = k
                break
            out[k] = x
            c = x

        if cut is not None:
            if first_cut_j is None:
                first_cut_j = j
            vals[j, fc:fc + cut] = out[:cut]
            limit = fc + cut - 1
        else:
            vals[j, fc:end + 1] = out
            # an uncut line is valid through `end`

    fld.invalidate_cache()
    if best is not None:
        i_abs, j_b, val = best
        loc = NullPoint(float(g.u(i_abs)), float(g.ubar(j_b)))
        # store the singular node so field scans agree with the report
        fld.ensure_rows(j_b)
        fld.values[j_b, i_abs] = val
        fld.invalidate_cache()
        return "blowup", loc, val, first_cut_j
    return None, None, None, None


def _tail_audit_ratio(fld: NullField) -> float:
    """max |phi_u| on the u = u_max edge relative to the global max |phi_u|.

    The marched field itself is exact regardless of the u truncation (the
    rectangle update only propagates influence toward larger u and ubar);
    this ratio bounds what the weighted flux norms can lose to truncation.
    """
    d = fld.phi_u
    g = fld.grid
    edge = float(np.max(np.abs(d[:, g.i_max])))
    full = float(np.max(np.abs(d)))
    if full == 0.0:
        return 0.0
    return edge / full


def _attach_traces(report: SolveReport, fld: NullField, params: ProblemParams,
                   j_stop: int | None = None) -> None:
    report.m_trace = estimates.m_trace(fld, params.p, j_stop=j_stop)
    report.sup_trace = estimates.sup_trace(fld, params.p, j_stop=j_stop)
    report.field = fld


# ---------------------------------------------------------------------------
# public solves
# ---------------------------------------------------------------------------

def solve_linear(params: ProblemParams, fld: NullField, G=None, *,
                 source_field: NullField | None = None,
                 compute_traces: bool = True) -> SolveReport:
    """March the inhomogeneous linear problem from an initialised field.

    The field's seeded nodes (first ubar line, per-line boundary nodes, and
    the two data layers) are honoured as given; every other in-domain node is
    overwritten.  G is a callable G(u, ubar) evaluated at rectangle midpoints
    (u may be a numpy array), or None for the homogeneous problem.
    """
    t0 = time.perf_counter()
    _march_linear(params, fld, G=G, source_field=source_field)
    status = SolveStatus.DIVERGED if fld.diverged else SolveStatus.COMPLETED_WINDOW
    report = SolveReport(status=status)
    if fld.diverged:
        report.location = fld.first_failure
    if compute_traces:
        _attach_traces(report, fld, params)
    else:
        report.field = fld
    report.wall_time = time.perf_counter() - t0
    return report


def solve_semilinear(params: ProblemParams, profile: RadialProfile) -> SolveReport:
    """Direct predictor-corrector march of the full semilinear problem.

    Reports BLOW_UP with t* = u* + ubar* - 2 when |phi| first exceeds
    params.blowup_threshold, DIVERGED on non-finite values before that, and
    COMPLETED_WINDOW otherwise.  Completed runs re-march on an enlarged u
    domain (bounded retries) if the flux derivative has not decayed at the
    truncation edge.
    """
    t0 = time.perf_counter()
    base_umax = params.resolved_u_max
    for attempt in range(_TAIL_RETRIES + 1):
        grid = NullGrid(h=params.h, ubar_max=params.ubar_max,
                        u_max=base_umax + 4.0 * attempt)
        fld = init_from_data(params, profile, source="semilinear", grid=grid, lazy=True)
        kind, loc, _val, cut_j = _march_semilinear(params, fld)
        if kind is not None:
            break
        ratio = _tail_audit_ratio(fld)
        if ratio <= TAIL_AUDIT_TOL:
            break

    report = SolveReport(status=SolveStatus.COMPLETED_WINDOW)
    j_stop = None
    if kind == "blowup":
        report.status = SolveStatus.BLOW_UP
        report.location = loc
        report.t_star = loc.u + loc.ubar - 2.0
        j_stop = cut_j
        report.tail_audit_ratio = None
    elif kind == "diverged":
        report.status = SolveStatus.DIVERGED
        report.location = loc
        j_stop = cut_j
    else:
        report.tail_audit_ratio = ratio
    _attach_traces(report, fld, params, j_stop=j_stop)
    report.wall_time = time.perf_counter() - t0
    return report


def picard_solve(params: ProblemParams, profile: RadialProfile,
                 max_iters: int = 12, tol: float = 1e-10) -> SolveReport:
    """Fixed-point iteration: each iterate solves the linear problem with the
    source built from the previous iterate at rectangle midpoints.

    The initial iterate is the homogeneous (G = 0) evolution of the data.
    picard_deltas[k] records sup over ubar of M(phi^(k+1) - phi^(k)); the
    iteration stops below `tol`, at `max_iters`, on blow-up/divergence, or
    after three consecutive delta increases (reported as non_contraction).
    """
    if max_iters < 2:
        raise ValueError(f"picard_solve requires max_iters >= 2, got {max_iters}")
    t0 = time.perf_counter()
    grid = NullGrid.from_params(params)
    seeds = init_from_data(params, profile, source="semilinear", grid=grid)

    prev = seeds.copy()
    _march_linear(params, prev, G=None)
    report = SolveReport(status=SolveStatus.COMPLETED_WINDOW)
    deltas: list[float] = []
    increases = 0

    if prev.diverged:
        report.status = SolveStatus.DIVERGED
        report.location = prev.first_failure
    else:
        for _k in range(max_iters):
            cur = seeds.copy()
            _march_linear(params, cur, source_field=prev)
            if cur.diverged:
                report.status = SolveStatus.DIVERGED
                report.location = cur.first_failure
                prev = cur
                break
            hit = blowup_scan(cur, params.blowup_threshold)
            if hit is not None:
                report.status = SolveStatus.BLOW_UP
                report.location = hit[0]
                report.t_star = hit[0].u + hit[0].ubar - 2.0
                prev = cur
                break
            diff_trace = estimates.m_trace(cur.diff(prev), params.p)
            delta = float(np.max(diff_trace.values)) if diff_trace.values.size else 0.0
            if deltas and delta > deltas[-1]:
                increases += 1
            else:
                increases = 0
            deltas.append(delta)
            prev = cur
            if delta < tol:
                break
            if increases >= 3:
                report.non_contraction = True
                report.status = SolveStatus.DIVERGED
                break

    report.picard_deltas = deltas
    j_stop = None
    if report.status is not SolveStatus.COMPLETED_WINDOW and report.location is not None:
        j_stop = prev.j_of_ubar(report.location.ubar)
    if report.status is SolveStatus.COMPLETED_WINDOW:
        report.tail_audit_ratio = _tail_audit_ratio(prev)
    _attach_traces(report, prev, params, j_stop=j_stop)
    report.wall_time = time.perf_counter() - t0
    return report


def blowup_scan(fld: NullField, threshold: float = 1e8):
    """First node, in march order, with |phi| > threshold or non-finite.

    Returns (NullPoint, value) or None; deterministic given the grid.
    """
    g = fld.grid
    vals = fld.values
    for j in range(min(g.j_max + 1, fld.row_count)):
        i0 = g.i_start(j)
        row = vals[j, i0:]
        bad = (np.abs(row) > threshold) | ~np.isfinite(row)
        if bad.any():
            k = int(np.argmax(bad))
            pt = NullPoint(float(g.u(i0 + k)), float(g.ubar(j)))
            return pt, float(row[k])
    return None
