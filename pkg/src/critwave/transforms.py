"""Changes of unknown and coordinates for the damped radial wave problem.

The physical unknown phi(t, r) solves

    phi_tt - phi_rr - 2 phi_r / r + mu phi_t / (t+2) = |phi|^p,   r <= 1 data.

Substituting psi = (t+2)^(mu/2) phi removes the first-order damping term and
leaves the potential mu(2-mu)/(4(t+2)^2).  Passing to null coordinates

    u = (t + 2 + r)/2,    ubar = (t + 2 - r)/2,

and to the radially weighted unknown  phi_null = r * psi  reduces the
equation to exact null form

    d^2 phi / du dubar + V phi = |phi|^p (u-ubar)^(1-p) (u+ubar)^(-mu(p-1)/2),

with V = mu(2-mu) / (4 (u+ubar)^2).  This module holds those maps, the
scaled initial data, and the problem/profile containers shared by the
solvers and the estimate verifiers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "Direction",
    "NullPoint",
    "ProblemParams",
    "RadialProfile",
    "phys_to_null",
    "null_to_phys",
    "scale_unknown",
    "initial_data_scaled",
    "potential",
    "nonlinearity",
    "to_null_unknown",
    "from_null_unknown",
]


class Direction(Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


@dataclass(frozen=True)
class NullPoint:
    """A point in null coordinates; u >= ubar means r >= 0, u + ubar >= 2 means t >= 0."""

    u: float
    ubar: float


def _lattice_count(length: float, h: float, what: str) -> int:
    """Number of h-steps in `length`, required to be integral within rounding."""
    steps = length / h
    n = round(steps)
    if n < 1 or abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError(
            f"mesh width h={h} must divide {what}={length} (got {steps} steps); "
            "grid lines would miss the data segment"
        )
    return n


@dataclass(frozen=True)
class ProblemParams:
    """Parameters governing one solve.

    mu in [0, 2] (endpoints are the undamped reductions used by the
    cross-validation oracles; the theorem's window [1.5, 2) is flagged by
    exponents.admissible, not enforced here), p in (1, 2], data amplitude
    eps >= 0, domain bound ubar_max >= 1, null mesh width h, and the
    divergence threshold for blow-up detection.  u_max defaults to
    ubar_max + 4; truncation in u never feeds back into kept nodes because
    the characteristic march only propagates influence toward larger u and
    ubar.
    """

    mu: float
    p: float
    eps: float
    ubar_max: float
    h: float
    blowup_threshold: float = 1e8
    u_max: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.mu <= 2.0):
            raise ValueError(f"mu must lie in [0, 2], got {self.mu}")
        if not (1.0 < self.p <= 2.0):
            raise ValueError(f"p must lie in (1, 2], got {self.p}")
        if not (self.eps >= 0.0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be finite and >= 0, got {self.eps}")
        if not (self.ubar_max >= 1.0):
            raise ValueError(f"ubar_max must be >= 1, got {self.ubar_max}")
        if not (self.h > 0.0):
            raise ValueError(f"h must be positive, got {self.h}")
        if not (self.blowup_threshold > 0.0):
            raise ValueError(f"blowup_threshold must be positive, got {self.blowup_threshold}")
        # grid lines must hit ubar = 1/2 and the initial segment exactly
        _lattice_count(1.0, self.h, "the unit data width")
        _lattice_count(self.ubar_max - 0.5, self.h, "ubar_max - 1/2")
        if self.u_max is not None:
            if self.u_max < self.ubar_max + 1.0:
                raise ValueError(
                    f"u_max={self.u_max} too small; need at least ubar_max + 1 = {self.ubar_max + 1.0}"
                )
            _lattice_count(self.u_max - 0.5, self.h, "u_max - 1/2")

    @property
    def resolved_u_max(self) -> float:
        return self.u_max if self.u_max is not None else self.ubar_max + 4.0


def _bump(x: np.ndarray, k: int) -> np.ndarray:
    inside = np.abs(x) < 1.0
    y = np.where(inside, 1.0 - x * x, 0.0)
    return np.where(inside, y**k, 0.0)


class RadialProfile:
    """Initial data pair (phi0, phi1) as radial functions supported in r <= 1.

    Two families: a polynomial bump A(1-r^2)^k (C^(k-1) across the support
    edge; k defaults to 3 so the quadratures see a C^2 function), and
    tabulated samples interpolated by a monotone cubic rule, clamped to 0
    outside [0, 1] so the support condition holds exactly.  Data must be
    nonnegative (tolerance -1e-12) unless nonneg_override is set.
    """

    def __init__(
        self,
        phi0: Callable[[np.ndarray], np.ndarray],
        phi1: Callable[[np.ndarray], np.ndarray],
        phi0_d1: Callable[[np.ndarray], np.ndarray],
        phi0_d2: Callable[[np.ndarray], np.ndarray],
        kind: str,
        nonneg_override: bool = False,
    ) -> None:
        self._phi0 = phi0
        self._phi1 = phi1
        self._phi0_d1 = phi0_d1
        self._phi0_d2 = phi0_d2
        self.kind = kind
        self.support_radius = 1.0
        if not nonneg_override:
            rr = np.linspace(0.0, 1.0, 2049)
            if self.phi0(rr).min() < -1e-12 or self.phi1(rr).min() < -1e-12:
                raise ValueError(
                    "initial data must be nonnegative (pass nonneg_override=True to explore beyond)"
                )

    # -- evaluation (vectorised; scalars pass through np.asarray) ----------
    def _clamped(self, f, r):
        r = np.asarray(r, dtype=float)
        out = np.where((r >= 0.0) & (r < 1.0), f(np.clip(r, 0.0, 1.0)), 0.0)
        return out if out.ndim else float(out)

    def phi0(self, r):
        return self._clamped(self._phi0, r)

    def phi1(self, r):
        return self._clamped(self._phi1, r)

    def phi0_d1(self, r):
        return self._clamped(self._phi0_d1, r)

    def phi0_d2(self, r):
        return self._clamped(self._phi0_d2, r)

    # -- constructors -------------------------------------------------------
    @classmethod
    def bump(cls, amplitude: float = 1.0, k: int = 3, phi1_zero: bool = False,
             nonneg_override: bool = False) -> "RadialProfile":
        if k < 2 or int(k) != k:
            raise ValueError(f"bump smoothness k must be an integer >= 2, got {k}")
        a = float(amplitude)
        k = int(k)

        def f0(r):
            return a * _bump(r, k)

        def f1(r):
            return np.zeros_like(np.asarray(r, dtype=float)) if phi1_zero else a * _bump(r, k)

        def d1(r):
            return -2.0 * a * k * r * _bump(r, k - 1)

        def d2(r):
            val = -2.0 * a * k * _bump(r, k - 1)
            if k >= 2:
                val = val + 4.0 * a * k * (k - 1) * r * r * _bump(r, k - 2)
            return val

        return cls(f0, f1, d1, d2, kind=f"bump(A={a},k={k})", nonneg_override=nonneg_override)

    @classmethod
    def tabulated(cls, r, phi0, phi1, nonneg_override: bool = False) -> "RadialProfile":
        r = np.asarray(r, dtype=float)
        phi0 = np.asarray(phi0, dtype=float)
        phi1 = np.asarray(phi1, dtype=float)
        if r.ndim != 1 or r.size < 2:
            raise ValueError("tabulated profile needs a 1-D r grid with at least 2 samples")
        if np.any(np.diff(r) <= 0.0):
            raise ValueError("tabulated r values must be strictly increasing")
        if r[0] < 0.0 or r[-1] > 1.0:
            raise ValueError("tabulated r values must lie in [0, 1]")
        p0 = PchipInterpolator(r, phi0, extrapolate=False)
        p1 = PchipInterpolator(r, phi1, extrapolate=False)
        p0d1 = p0.derivative(1)
        p0d2 = p0.derivative(2)

        def guard(f):
            def inner(x):
                y = f(np.clip(x, r[0], r[-1]))
                return np.nan_to_num(y, nan=0.0)

            return inner

        return cls(guard(p0), guard(p1), guard(p0d1), guard(p0d2),
                   kind="tabulated", nonneg_override=nonneg_override)

    @classmethod
    def from_csv(cls, path, nonneg_override: bool = False) -> "RadialProfile":
        """Load a tabulated profile: header `r,phi0,phi1`, strictly increasing
        r in [0, 1], at least 8 rows."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header] != ["r", "phi0", "phi1"]:
                raise ValueError(f"profile CSV {path} must start with header 'r,phi0,phi1'")
            rows = [(float(a), float(b), float(c)) for a, b, c in reader]
        if len(rows) < 8:
            raise ValueError(f"profile CSV {path} needs at least 8 data rows, got {len(rows)}")
        r, f0, f1 = (np.array(col) for col in zip(*rows))
        return cls.tabulated(r, f0, f1, nonneg_override=nonneg_override)


# ---------------------------------------------------------------------------
# coordinate and unknown maps
# ---------------------------------------------------------------------------

def phys_to_null(t: float, r: float) -> NullPoint:
    """(t, r) -> (u, ubar) with u = (t+2+r)/2, ubar = (t+2-r)/2."""
    if t < 0.0 or r < 0.0:
        raise ValueError(f"phys_to_null requires t >= 0 and r >= 0, got t={t}, r={r}")
    return NullPoint(u=(t + 2.0 + r) / 2.0, ubar=(t + 2.0 - r) / 2.0)


def null_to_phys(pt: NullPoint) -> tuple[float, float]:
    """Inverse map; rejects points with r < 0 or t < 0."""
    t = pt.u + pt.ubar - 2.0
    r = pt.u - pt.ubar
    if r < 0.0:
        raise ValueError(f"null point {pt} has u < ubar (negative radius)")
    if t < 0.0:
        raise ValueError(f"null point {pt} has u + ubar < 2 (negative time)")
    return t, r


def scale_unknown(value: float, t: float, mu: float, direction: Direction) -> float:
    """Apply psi = (t+2)^(mu/2) phi (FORWARD) or its inverse."""
    if t < 0.0:
        raise ValueError(f"scale_unknown requires t >= 0, got t={t}")
    factor = (t + 2.0) ** (0.5 * mu)
    if direction is Direction.FORWARD:
        return value * factor
    if direction is Direction.INVERSE:
        return value / factor
    raise ValueError(f"unknown direction {direction!r}")


def initial_data_scaled(profile: RadialProfile, eps: float, mu: float, r):
    """Initial data of the damping-free unknown psi at t = 0:

        psi0 = 2^(mu/2) eps phi0(r)
        psi1 = eps ( (mu/2) 2^(mu/2 - 1) phi0(r) + 2^(mu/2) phi1(r) )
    """
    pow_half = 2.0 ** (0.5 * mu)
    f0 = profile.phi0(r)
    f1 = profile.phi1(r)
    psi0 = pow_half * eps * f0
    psi1 = eps * (0.5 * mu * (2.0 ** (0.5 * mu - 1.0)) * f0 + pow_half * f1)
    return psi0, psi1


def potential(pt: NullPoint, mu: float) -> float:
    """Zeroth-order coefficient mu(2-mu) / (4 (u+ubar)^2) of the reduced equation."""
    ssum = pt.u + pt.ubar
    if ssum <= 0.0:
        raise ValueError(f"potential undefined at u + ubar = {ssum} <= 0")
    return mu * (2.0 - mu) / (4.0 * ssum * ssum)


def nonlinearity(phi_value: float, pt: NullPoint, mu: float, p: float) -> float:
    """Source |phi|^p (u-ubar)^(1-p) (u+ubar)^(-mu(p-1)/2).

    Undefined on the axis u = ubar; marching code must evaluate at cell
    midpoints (where u - ubar >= h/2) instead, relying on phi = O(u - ubar).
    """
    rad = pt.u - pt.ubar
    if rad <= 0.0:
        raise ValueError(
            "nonlinearity is singular at u = ubar; evaluate at a cell midpoint off the axis"
        )
    return (abs(phi_value) ** p) * rad ** (1.0 - p) * (pt.u + pt.ubar) ** (-0.5 * mu * (p - 1.0))


def to_null_unknown(phi_phys: float, t: float, r: float, mu: float) -> float:
    """Chain phi -> psi -> r*psi sending the physical unknown to the null one."""
    return r * scale_unknown(phi_phys, t, mu, Direction.FORWARD)


def from_null_unknown(phi_null: float, t: float, r: float, mu: float) -> float:
    """Inverse chain; requires r > 0."""
    if r <= 0.0:
        raise ValueError("from_null_unknown requires r > 0; use axis extrapolation instead")
    return scale_unknown(phi_null / r, t, mu, Direction.INVERSE)
