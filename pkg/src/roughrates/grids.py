"""Functions on product grids and their rectangular increments.

Grid 2D ρ-variation is the supremum over grid-like partitions D x D' of a
rectangle of sum |f(A x B)|^ρ, raised to 1/ρ.  For a fixed column partition
the optimal row partition is a longest-path problem solved by dynamic
programming, so the exact search enumerates subsets of the smaller axis only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError

EXHAUSTIVE_LIMIT = 12
# relative margin a candidate must win by; keeps the coarsest optimum on ties
_TIE = 64 * np.finfo(float).eps


def _as_axis(t) -> np.ndarray:
    t = np.array(t, dtype=float)
    if t.ndim != 1 or len(t) < 1:
        raise ContractError("axis grids must be non-empty 1D arrays")
    if len(t) > 1 and not np.all(np.diff(t) > 0):
        raise ContractError("axis grids must be strictly increasing")
    t.setflags(write=False)
    return t


def grid_index(axis: np.ndarray, t: float, tol: float = 1e-12) -> int:
    """Index of ``t`` on ``axis``; raise unless it is a grid point."""
    i = int(np.searchsorted(axis, t))
    for j in (i - 1, i):
        if 0 <= j < len(axis) and abs(axis[j] - t) <= tol * max(1.0, abs(t)):
            return j
    raise ContractError(f"{t} is not a grid point")


@dataclass(frozen=True, eq=False)
class GridFunctionND:
    """A real function sampled on the product of ``n <= 4`` axis grids."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(_as_axis(a) for a in self.axes)
        values = np.array(self.values, dtype=float)
        if not 1 <= len(axes) <= 4:
            raise ContractError("grid functions support 1 to 4 axes")
        if values.shape != tuple(len(a) for a in axes):
            raise ContractError(f"values shape {values.shape} does not match axes")
        if not np.all(np.isfinite(values)):
            raise ContractError("non-finite grid values")
        values.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def indices(self, box) -> list[tuple[int, int]]:
        box = np.asarray(box, dtype=float).reshape(-1, 2)
        if len(box) != self.ndim:
            raise ContractError(f"box has {len(box)} sides, function has {self.ndim} axes")
        out = []
        for axis, (lo, hi) in zip(self.axes, box):
            if lo > hi:
                raise ContractError(f"box side [{lo}, {hi}] is reversed")
            out.append((grid_index(axis, lo), grid_index(axis, hi)))
        return out

    def restrict(self, box) -> GridFunctionND:
        idx = self.indices(box)
        sl = tuple(slice(a, b + 1) for a, b in idx)
        return GridFunctionND(tuple(ax[s] for ax, s in zip(self.axes, sl)), self.values[sl])


def rect_increment_nd(f: GridFunctionND, box) -> float:
    """Alternating 2^n corner sum of ``f`` over ``box`` = [[s1,t1],...,[sn,tn]]."""
    idx = f.indices(box)
    total = 0.0
    for corner in itertools.product((0, 1), repeat=f.ndim):
        sign = (-1) ** (f.ndim - sum(corner))
        total += sign * f.values[tuple(pair[c] for pair, c in zip(idx, corner))]
    return float(total)


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """A real function on x-grid times y-grid, evaluated by exact lookup."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x, y = _as_axis(self.x), _as_axis(self.y)
        values = np.array(self.values, dtype=float)
        if values.shape != (len(x), len(y)):
            raise ContractError(f"values shape {values.shape} != ({len(x)}, {len(y)})")
        if not np.all(np.isfinite(values)):
            raise ContractError("non-finite grid values")
        values.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, x, y) -> GridFunction2D:
        x, y = np.asarray(x, float), np.asarray(y, float)
        return cls(x, y, func(x[:, None], y[None, :]) * np.ones((len(x), len(y))))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __call__(self, s: float, t: float) -> float:
        return float(self.values[grid_index(self.x, s), grid_index(self.y, t)])

    def full_rectangle(self) -> tuple[float, float, float, float]:
        return (self.x[0], self.x[-1], self.y[0], self.y[-1])

    def restrict(self, rectangle=None) -> GridFunction2D:
        if rectangle is None:
            return self
        s, t, u, v = rectangle
        if s > t or u > v:
            raise ContractError(f"rectangle {rectangle} is reversed")
        i0, i1 = grid_index(self.x, s), grid_index(self.x, t)
        j0, j1 = grid_index(self.y, u), grid_index(self.y, v)
        return GridFunction2D(self.x[i0 : i1 + 1], self.y[j0 : j1 + 1], self.values[i0 : i1 + 1, j0 : j1 + 1])

    def increment(self, s: float, t: float, u: float, v: float) -> float:
        """f(t,v) - f(t,u) - f(s,v) + f(s,u); zero on degenerate rectangles."""
        if s > t or u > v:
            raise ContractError("rectangle sides must satisfy s <= t and u <= v")
        i0, i1 = grid_index(self.x, s), grid_index(self.x, t)
        j0, j1 = grid_index(self.y, u), grid_index(self.y, v)
        F = self.values
        return float((F[i1, j1] - F[i1, j0]) - (F[i0, j1] - F[i0, j0]))

    def cell_increments(self) -> np.ndarray:
        """Increments over the elementary grid cells, shape (n-1, m-1)."""
        return np.diff(np.diff(self.values, axis=0), axis=1)

    def transpose(self) -> GridFunction2D:
        return GridFunction2D(self.y, self.x, self.values.T)


@dataclass(frozen=True)
class VariationResult:
    value: float
    rows: tuple
    cols: tuple
    exact: bool


def _row_costs(F: np.ndarray, cols: np.ndarray, rho: float) -> np.ndarray:
    # C[a, b] = sum_j |f([x_a, x_b] x [y_cj, y_cj+1])|^rho
    G = np.diff(F[:, cols], axis=1)
    H = G[None, :, :] - G[:, None, :]
    return (np.abs(H) ** rho).sum(axis=2)


def _best_chain(C: np.ndarray) -> tuple[float, tuple]:
    """Longest 0 -> n-1 path through increasing indices; ties favour fewer points."""
    n = C.shape[0]
    best = np.zeros(n)
    prev = np.zeros(n, dtype=int)
    for b in range(1, n):
        cand = best[:b] + C[:b, b]
        top = cand.max()
        a = int(np.argmax(cand >= top - _TIE * abs(top)))
        best[b], prev[b] = cand[a], a
    path = [n - 1]
    while path[-1] != 0:
        path.append(int(prev[path[-1]]))
    return float(best[-1]), tuple(reversed(path))


def _improves(new: float, old: float) -> bool:
    return new > old + _TIE * max(abs(old), abs(new))


def variation_search(F: np.ndarray, rho: float, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> VariationResult:
    """Maximise the grid-partition sum of |increment|^rho over a value matrix.

    Exact when the smaller axis has at most ``exhaustive_limit`` interior
    points.  Otherwise alternate exact row and column optimisations from
    a few starting partitions; the result is then a lower bound.
    """
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    if n < 2 or m < 2:
        return VariationResult(0.0, tuple(range(n)), tuple(range(m)), True)
    transposed = m > n
    if transposed:
        F = F.T
        n, m = m, n
    if m - 2 <= exhaustive_limit:
        best = (-1.0, (), ())
        interior = range(1, m - 1)
        for r in range(m - 1):
            for sub in itertools.combinations(interior, r):
                cols = np.array((0,) + sub + (m - 1,))
                val, rows = _best_chain(_row_costs(F, cols, rho))
                if _improves(val, best[0]):
                    best = (val, rows, tuple(int(c) for c in cols))
        exact = True
    else:
        best = (-1.0, (), ())
        starts = [np.array([0, m - 1]), np.arange(m), np.arange(0, m, 2) if (m - 1) % 2 == 0 else np.append(np.arange(0, m - 1, 2), m - 1)]
        for cols in starts:
            val, rows = _best_chain(_row_costs(F, cols, rho))
            while True:
                cval, new_cols = _best_chain(_row_costs(F.T, np.array(rows), rho))
                if not _improves(cval, val):
                    break
                val, cols = cval, np.array(new_cols)
                rval, new_rows = _best_chain(_row_costs(F, cols, rho))
                if not _improves(rval, val):
                    break
                val, rows = rval, new_rows
            if _improves(val, best[0]):
                best = (val, rows, tuple(int(c) for c in cols))
        exact = False
    val, rows, cols = best
    if transposed:
        rows, cols = cols, rows
    return VariationResult(max(val, 0.0) ** (1.0 / rho), rows, cols, exact)


def grid_rho_variation(f: GridFunction2D, rho: float, rectangle=None, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> float:
    """Grid ρ-variation V_ρ(f; rectangle), searching sub-partitions of f's grid."""
    return grid_rho_variation_detail(f, rho, rectangle, exhaustive_limit).value


def grid_rho_variation_detail(f: GridFunction2D, rho: float, rectangle=None, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> VariationResult:
    if rho < 1:
        raise ContractError(f"rho must be >= 1, got {rho}")
    sub = f.restrict(rectangle)
    res = variation_search(sub.values, rho, exhaustive_limit)
    return res


def exhaustive_rho_variation(f: GridFunction2D, rho: float, rectangle=None) -> float:
    """Brute force over every pair of sub-partitions; for small grids only."""
    sub = f.restrict(rectangle)
    F = sub.values
    n, m = F.shape
    if n > 12 or m > 12:
        raise ContractError("exhaustive search is limited to 12 points per axis")
    best = 0.0
    for rs in range(n - 1):
        for rsub in itertools.combinations(range(1, n - 1), rs):
            rows = (0,) + rsub + (n - 1,)
            Fr = F[list(rows)]
            for cs in range(m - 1):
                for csub in itertools.combinations(range(1, m - 1), cs):
                    cols = (0,) + csub + (m - 1,)
                    inc = np.diff(np.diff(Fr[:, list(cols)], axis=0), axis=1)
                    best = max(best, float((np.abs(inc) ** rho).sum()))
    return best ** (1.0 / rho)


def v_infinity(f: GridFunction2D, rectangle=None) -> float:
    """max |f(A x B)| over grid rectangles A x B inside ``rectangle``."""
    F = f.restrict(rectangle).values
    n = F.shape[0]
    out = 0.0
    for a in range(n - 1):
        H = F[a + 1 :] - F[a]
        out = max(out, float((H.max(axis=1) - H.min(axis=1)).max()))
    return out


def controlled_variation(f: GridFunction2D, rho: float, rectangle=None) -> float:
    """Guillotine ρ-variation: the sup of sum |f(R_i)|^ρ over partitions of the
    rectangle obtained by recursive straight cuts along grid lines.

    Returned as the ρ-th power, which is superadditive over any straight split.
    It dominates V_ρ^ρ (grid-like partitions are guillotine partitions) and
    is dominated by the controlled variation over arbitrary partitions.
    """
    if rho < 1:
        raise ContractError(f"rho must be >= 1, got {rho}")
    F = f.restrict(rectangle).values
    n, m = F.shape
    if n * m > 40 * 40:
        raise ContractError("guillotine search limited to 1600 grid points")

    @lru_cache(maxsize=None)
    def G(a, b, c, d):
        val = abs((F[b, d] - F[b, c]) - (F[a, d] - F[a, c])) ** rho
        for s in range(a + 1, b):
            val = max(val, G(a, s, c, d) + G(s, b, c, d))
        for s in range(c + 1, d):
            val = max(val, G(a, b, c, s) + G(a, b, s, d))
        return val

    if n < 2 or m < 2:
        return 0.0
    return float(G(0, n - 1, 0, m - 1))
