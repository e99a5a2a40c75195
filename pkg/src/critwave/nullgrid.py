"""Triangular null-coordinate grid and discrete fields on it.

Both coordinates live on the lattice 1/2 + k*h.  A line of constant
ubar_j = 1/2 + j*h carries u-nodes from u_start(ubar_j) = max(ubar_j,
2 - ubar_j) out to the truncation u_max.  With n = 1/h an integer the
initial segment {u + ubar = 2} and the axis {u = ubar} both fall exactly on
lattice nodes: in index terms t = 0 is i + j = n and the axis is i = j.

Fields are stored densely as values[j, i]; entries outside the triangular
domain stay zero.  The derivative cache phi_u uses one-sided differences
along each u-line (backward in the marching direction, forward at the first
node) unless an analytic derivative is supplied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .transforms import NullPoint, ProblemParams, _lattice_count

__all__ = ["NullGrid", "NullField"]


@dataclass(frozen=True)
class NullGrid:
    h: float
    ubar_max: float
    u_max: float
    n_unit: int = dc_field(init=False)   # lattice steps per unit length
    j_max: int = dc_field(init=False)    # index of the line ubar = ubar_max
    i_max: int = dc_field(init=False)    # index of the last u node

    def __post_init__(self) -> None:
        n = _lattice_count(1.0, self.h, "the unit data width")
        j_max = _lattice_count(self.ubar_max - 0.5, self.h, "ubar_max - 1/2")
        i_max = _lattice_count(self.u_max - 0.5, self.h, "u_max - 1/2")
        if i_max < j_max + 1:
            raise ValueError(
                f"u_max={self.u_max} leaves no room above ubar_max={self.ubar_max}"
            )
        object.__setattr__(self, "n_unit", n)
        object.__setattr__(self, "j_max", j_max)
        object.__setattr__(self, "i_max", i_max)

    @classmethod
    def from_params(cls, params: ProblemParams) -> "NullGrid":
        return cls(h=params.h, ubar_max=params.ubar_max, u_max=params.resolved_u_max)

    # -- coordinates ---------------------------------------------------------
    def ubar(self, j):
        return 0.5 + np.asarray(j) * self.h

    def u(self, i):
        return 0.5 + np.asarray(i) * self.h

    def i_start(self, j: int) -> int:
        """First u-index on line j: the axis (i = j) above the data corner,
        the initial line (i = n - j) below it."""
        return max(j, self.n_unit - j)

    @property
    def data_j_max(self) -> int:
        """Last line whose first node sits on the initial segment."""
        return min(self.j_max, self.n_unit // 2)

    def line_u(self, j: int) -> np.ndarray:
        return self.u(np.arange(self.i_start(j), self.i_max + 1))

    def first_marchable(self, j: int) -> int:
        """First index on line j whose characteristic rectangle closes inside
        the grid; everything below it must be seeded (initial data, Taylor
        layer, or axis zero)."""
        return max(self.i_start(j) + 1, self.i_start(j - 1) + 1)

    def node_count(self) -> int:
        return sum(self.i_max - self.i_start(j) + 1 for j in range(self.j_max + 1))


class NullField:
    """phi sampled on a NullGrid, with a phi_u cache and divergence marker.

    Storage is dense values[j, i] over `row_count` leading ubar lines; a
    solver that stops early (blow-up) only ever allocates the lines it
    marched.  Fully populated fields have row_count = j_max + 1.
    """

    def __init__(self, grid: NullGrid, values: np.ndarray | None = None,
                 rows: int | None = None) -> None:
        self.grid = grid
        width = grid.i_max + 1
        if values is None:
            rows = grid.j_max + 1 if rows is None else min(rows, grid.j_max + 1)
            values = np.zeros((rows, width))
        else:
            values = np.asarray(values, dtype=float)
            if values.ndim != 2 or values.shape[1] != width or values.shape[0] > grid.j_max + 1:
                raise ValueError(f"values shape {values.shape} incompatible with grid")
        self.values = values
        self._phi_u: np.ndarray | None = None
        self.diverged = False
        self.first_failure: NullPoint | None = None

    @property
    def row_count(self) -> int:
        return self.values.shape[0]

    def ensure_rows(self, j: int) -> None:
        """Grow the dense storage (geometrically) to include line j."""
        have = self.row_count
        if j < have:
            return
        want = min(max(j + 1, int(1.6 * have) + 8), self.grid.j_max + 1)
        extra = np.zeros((want - have, self.values.shape[1]))
        self.values = np.concatenate([self.values, extra], axis=0)
        self._phi_u = None

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_function(cls, grid: NullGrid, f, dfdu=None) -> "NullField":
        """Sample f(u, ubar) on every in-domain node; optionally install an
        analytic u-derivative instead of the one-sided difference cache."""
        fld = cls(grid)
        for j in range(grid.j_max + 1):
            i0 = grid.i_start(j)
            uu = grid.line_u(j)
            ub = float(grid.ubar(j))
            fld.values[j, i0:] = f(uu, ub)
        if dfdu is not None:
            cache = np.zeros_like(fld.values)
            for j in range(grid.j_max + 1):
                i0 = grid.i_start(j)
                cache[j, i0:] = dfdu(grid.line_u(j), float(grid.ubar(j)))
            fld._phi_u = cache
        return fld

    def copy(self) -> "NullField":
        out = NullField(self.grid, self.values.copy())
        out.diverged = self.diverged
        out.first_failure = self.first_failure
        return out

    def invalidate_cache(self) -> None:
        self._phi_u = None

    # -- derivative cache -------------------------------------------------------
    @property
    def phi_u(self) -> np.ndarray:
        """One-sided du differences along u-lines (forward at the first node)."""
        if self._phi_u is None:
            g = self.grid
            d = np.zeros_like(self.values)
            d[:, 1:] = np.diff(self.values, axis=1) / g.h
            for j in range(self.row_count):
                i0 = g.i_start(j)
                if i0 > 0:
                    d[j, :i0] = 0.0
                if i0 + 1 <= g.i_max:
                    d[j, i0] = d[j, i0 + 1]
                else:
                    d[j, i0] = 0.0
            self._phi_u = d
        return self._phi_u

    # -- queries -------------------------------------------------------------
    def line(self, j: int) -> np.ndarray:
        return self.values[j, self.grid.i_start(j):]

    def max_abs(self) -> float:
        g = self.grid
        best = 0.0
        for j in range(self.row_count):
            seg = self.values[j, g.i_start(j):]
            if seg.size:
                best = max(best, float(np.max(np.abs(seg))))
        return best

    def diff(self, other: "NullField") -> "NullField":
        if other.grid is not self.grid and other.grid != self.grid:
            raise ValueError("cannot subtract fields on different grids")
        rows = min(self.row_count, other.row_count)
        return NullField(self.grid, self.values[:rows] - other.values[:rows])

    def j_of_ubar(self, ubar: float) -> int:
        g = self.grid
        j = round((ubar - 0.5) / g.h)
        if j < 0 or j > g.j_max or abs(float(g.ubar(j)) - ubar) > 1e-9:
            raise ValueError(f"ubar={ubar} is not a grid line (h={g.h})")
        return j

    # -- snapshot I/O -----------------------------------------------------------
    def to_csv(self, path) -> None:
        """Portable snapshot: CSV rows u,ubar,phi plus a JSON sidecar with the
        grid metadata at `<path>.meta.json`."""
        g = self.grid
        with open(path, "w", newline="") as fh:
            fh.write("u,ubar,phi\n")
            for j in range(self.row_count):
                ub = float(g.ubar(j))
                i0 = g.i_start(j)
                uu = g.line_u(j)
                row = self.values[j, i0:]
                for uv, pv in zip(uu, row):
                    fh.write(f"{uv:.17g},{ub:.17g},{pv:.17g}\n")
        meta = {
            "h": g.h,
            "ubar_max": g.ubar_max,
            "u_max": g.u_max,
            "diverged": self.diverged,
        }
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_csv(cls, path) -> "NullField":
        with open(str(path) + ".meta.json") as fh:
            meta = json.load(fh)
        grid = NullGrid(h=meta["h"], ubar_max=meta["ubar_max"], u_max=meta["u_max"])
        fld = cls(grid)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        ii = np.round((data[:, 0] - 0.5) / grid.h).astype(int)
        jj = np.round((data[:, 1] - 0.5) / grid.h).astype(int)
        fld.values[jj, ii] = data[:, 2]
        fld.diverged = bool(meta.get("diverged", False))
        return fld
