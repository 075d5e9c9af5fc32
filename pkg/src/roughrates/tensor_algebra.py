"""Truncated tensor algebra T^N(R^d).

Elements are stored densely, one array per level: level ``n`` has shape
``(d,) * n`` and level 0 is a 0-d array.  The module-level ``_levels_*``
helpers work on plain lists of arrays that may carry leading batch
dimensions; :class:`TensorElement` wraps a single unbatched element.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError, SingularElementError

MAX_ENTRIES = 10**7


def _check_size(dim: int, depth: int) -> None:
    if dim < 1 or depth < 0:
        raise ContractError(f"invalid dimension/depth ({dim}, {depth})")
    if dim**depth > MAX_ENTRIES:
        raise ContractError(f"d^N = {dim}^{depth} exceeds the {MAX_ENTRIES} entry cap")


# ---------------------------------------------------------------------------
# batched level-list kernels
# ---------------------------------------------------------------------------

def _outer(a: np.ndarray, b: np.ndarray, na: int, nb: int) -> np.ndarray:
    """Tensor product of a level-``na`` and a level-``nb`` array (batched)."""
    batch = np.broadcast_shapes(a.shape[: a.ndim - na], b.shape[: b.ndim - nb])
    a2 = a.reshape(a.shape[: a.ndim - na] + (-1, 1))
    b2 = b.reshape(b.shape[: b.ndim - nb] + (1, -1))
    out = a2 * b2
    return out.reshape(batch + a.shape[a.ndim - na:] + b.shape[b.ndim - nb:])


def levels_mul(a: Sequence[np.ndarray], b: Sequence[np.ndarray], depth: int) -> list[np.ndarray]:
    """Truncated tensor product of two level lists."""
    out = []
    for n in range(depth + 1):
        acc = _outer(a[n], b[0], n, 0)
        for i in range(1, n + 1):
            acc = acc + _outer(a[n - i], b[i], n - i, i)
        out.append(acc)
    return out


def levels_exp(v: np.ndarray, depth: int) -> list[np.ndarray]:
    """Levels ``v^{(x)n} / n!`` of the exponential of a (batched) vector."""
    v = np.asarray(v, dtype=float)
    out = [np.ones(v.shape[:-1])]
    for n in range(1, depth + 1):
        out.append(_outer(out[-1], v, n - 1, 1) / n)
    return out


def levels_mul_exp(a: Sequence[np.ndarray], v: np.ndarray, depth: int) -> list[np.ndarray]:
    """``a (x) exp(v)`` without materializing exp(v) separately.

    Horner form: level n of the product is
    a_n + (a_{n-1} + (a_{n-2} + ...) v/2) v/1 style nesting, evaluated
    from the top level down so every input level is still intact.
    """
    out = list(a)
    for n in range(depth, 0, -1):
        acc = a[0]
        for i in range(1, n):
            acc = a[i] + _outer(acc, v, i - 1, 1) / (n - i + 1)
        out[n] = a[n] + _outer(acc, v, n - 1, 1)
    return out


# ---------------------------------------------------------------------------
# TensorElement
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TensorElement:
    """An element of T^N(R^d) with dense, read-only level arrays."""

    dim: int
    depth: int
    levels: tuple

    def __post_init__(self):
        _check_size(self.dim, self.depth)
        if len(self.levels) != self.depth + 1:
            raise ContractError(f"expected {self.depth + 1} levels, got {len(self.levels)}")
        frozen = []
        for n, lev in enumerate(self.levels):
            arr = np.array(lev, dtype=float)
            if arr.shape != (self.dim,) * n:
                raise ContractError(f"level {n} has shape {arr.shape}, expected {(self.dim,) * n}")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "levels", tuple(frozen))

    @classmethod
    def unit(cls, dim: int, depth: int) -> TensorElement:
        return cls.from_scalar(1.0, dim, depth)

    @classmethod
    def zero(cls, dim: int, depth: int) -> TensorElement:
        return cls.from_scalar(0.0, dim, depth)

    @classmethod
    def from_scalar(cls, c: float, dim: int, depth: int) -> TensorElement:
        _check_size(dim, depth)
        levels = [np.array(float(c))] + [np.zeros((dim,) * n) for n in range(1, depth + 1)]
        return cls(dim, depth, tuple(levels))

    @classmethod
    def from_levels(cls, levels: Sequence[np.ndarray]) -> TensorElement:
        levels = [np.asarray(l, dtype=float) for l in levels]
        depth = len(levels) - 1
        dim = levels[1].shape[0] if depth >= 1 else 1
        return cls(dim, depth, tuple(levels))

    def __getitem__(self, n: int) -> np.ndarray:
        return self.levels[n]

    @property
    def scalar(self) -> float:
        return float(self.levels[0])

    def is_grouplike(self) -> bool:
        return self.scalar == 1.0

    def _check_compatible(self, other: TensorElement) -> None:
        if not isinstance(other, TensorElement):
            raise ContractError(f"expected TensorElement, got {type(other).__name__}")
        if (self.dim, self.depth) != (other.dim, other.depth):
            raise ContractError(
                f"dimension/level mismatch: (d={self.dim}, N={self.depth}) vs (d={other.dim}, N={other.depth})"
            )

    def __add__(self, other: TensorElement) -> TensorElement:
        self._check_compatible(other)
        return TensorElement(self.dim, self.depth, tuple(a + b for a, b in zip(self.levels, other.levels)))

    def __sub__(self, other: TensorElement) -> TensorElement:
        self._check_compatible(other)
        return TensorElement(self.dim, self.depth, tuple(a - b for a, b in zip(self.levels, other.levels)))

    def __neg__(self) -> TensorElement:
        return self.scale(-1.0)

    def scale(self, c: float) -> TensorElement:
        return TensorElement(self.dim, self.depth, tuple(c * a for a in self.levels))

    def __mul__(self, other):
        if isinstance(other, TensorElement):
            return tensor_mul(self, other)
        return self.scale(float(other))

    def __rmul__(self, other):
        return self.scale(float(other))

    def truncate(self, depth: int) -> TensorElement:
        if depth > self.depth:
            raise ContractError("cannot truncate to a higher level")
        return TensorElement(self.dim, depth, self.levels[: depth + 1])

    def max_abs_diff(self, other: TensorElement) -> float:
        self._check_compatible(other)
        return max(float(np.max(np.abs(a - b), initial=0.0)) for a, b in zip(self.levels, other.levels))

    def allclose(self, other: TensorElement, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        self._check_compatible(other)
        return all(np.allclose(a, b, rtol=rtol, atol=atol) for a, b in zip(self.levels, other.levels))

    def __repr__(self) -> str:
        return f"TensorElement(dim={self.dim}, depth={self.depth}, norm={tensor_norm(self):.6g})"


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------

def tensor_mul(g: TensorElement, h: TensorElement) -> TensorElement:
    """Truncated tensor product: pi_n(g h) = sum_i pi_{n-i}(g) (x) pi_i(h)."""
    g._check_compatible(h)
    return TensorElement(g.dim, g.depth, tuple(levels_mul(g.levels, h.levels, g.depth)))


def tensor_inverse(g: TensorElement) -> TensorElement:
    """Inverse in T^N via the finite Neumann series around the scalar part."""
    g0 = g.scalar
    if g0 == 0.0:
        raise SingularElementError("tensor with zero scalar part is not invertible")
    y = g.scale(1.0 / g0) - TensorElement.unit(g.dim, g.depth)
    term = TensorElement.unit(g.dim, g.depth)
    acc = term
    for _ in range(g.depth):
        term = tensor_mul(term, -y)
        acc = acc + term
    return acc.scale(1.0 / g0)


def tensor_exp(v, depth: int | None = None) -> TensorElement:
    """Exponential of a level-1 vector or of a general tensor.

    For a vector ``v`` the result has levels ``v^{(x)n}/n!`` and ``depth``
    is required.  For a TensorElement the truncated power series is used,
    with the scalar part factored out as ``e^{x_0}``.
    """
    if isinstance(v, TensorElement):
        x = v
        c = x.scalar
        nil = x - TensorElement.from_scalar(c, x.dim, x.depth)
        term = TensorElement.unit(x.dim, x.depth)
        acc = term
        for k in range(1, x.depth + 1):
            term = tensor_mul(term, nil).scale(1.0 / k)
            acc = acc + term
        return acc.scale(math.exp(c))
    if depth is None:
        raise ContractError("depth is required when exponentiating a vector")
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ContractError("expected a level-1 vector")
    if not np.all(np.isfinite(v)):
        raise ContractError("non-finite vector")
    _check_size(v.shape[0], depth)
    return TensorElement(v.shape[0], depth, tuple(levels_exp(v, depth)))


def tensor_log(g: TensorElement) -> TensorElement:
    """Logarithm of an element with unit scalar part (finite series)."""
    if g.scalar != 1.0:
        raise ContractError(f"log requires scalar part 1, got {g.scalar}")
    y = g - TensorElement.unit(g.dim, g.depth)
    term = TensorElement.unit(g.dim, g.depth)
    acc = TensorElement.zero(g.dim, g.depth)
    for k in range(1, g.depth + 1):
        term = tensor_mul(term, y)
        acc = acc + term.scale((-1.0) ** (k + 1) / k)
    return acc


def dilate(g: TensorElement, lam: float) -> TensorElement:
    """Scale level n by ``lam**n``."""
    return TensorElement(g.dim, g.depth, tuple(lam**n * a for n, a in enumerate(g.levels)))


# ---------------------------------------------------------------------------
# norms and distances
# ---------------------------------------------------------------------------

def level_norms(g: TensorElement) -> np.ndarray:
    """Euclidean norm of each level."""
    return np.array([float(np.sqrt(np.sum(a * a))) for a in g.levels])


def tensor_norm(g: TensorElement) -> float:
    """max_n |pi_n(g)|, Euclidean per level."""
    return float(np.max(level_norms(g)))


def homogeneous_norm(g: TensorElement) -> float:
    """max_{1<=n<=N} (n! |pi_n(g)|)^{1/n}.

    Equivalent (up to constants depending on d, N) to the Carnot-Caratheodory
    norm on the step-N group; zero exactly at the unit.
    """
    norms = level_norms(g)
    return max((math.factorial(n) * norms[n]) ** (1.0 / n) for n in range(1, g.depth + 1)) if g.depth else 0.0


def _best_partition_sum(cost: np.ndarray) -> float:
    """max over sub-partitions of a grid of the sum of cost[a, b] over cells.

    ``cost[a, b]`` is the (nonnegative) contribution of the interval between
    grid points a < b.  The objective is additive over chosen intervals, so
    dynamic programming over the right endpoint is exact.
    """
    n = cost.shape[0]
    best = np.zeros(n)
    for b in range(1, n):
        best[b] = np.max(best[:b] + cost[:b, b])
    return float(best[-1])


def _exhaustive_partition_sum(cost: np.ndarray) -> float:
    n = cost.shape[0]
    top = 0.0
    interior = range(1, n - 1)
    for r in range(n - 1):
        for chosen in itertools.combinations(interior, r):
            pts = (0,) + chosen + (n - 1,)
            top = max(top, sum(cost[a, b] for a, b in zip(pts[:-1], pts[1:])))
    return top


def chen_table(increments: Sequence[TensorElement]) -> list[list[TensorElement | None]]:
    """All products x_{a,b} = x_{a,a+1} ... x_{b-1,b} of consecutive increments."""
    k = len(increments)
    table: list[list[TensorElement | None]] = [[None] * (k + 1) for _ in range(k + 1)]
    for a in range(k):
        acc = increments[a]
        table[a][a + 1] = acc
        for b in range(a + 2, k + 1):
            acc = tensor_mul(acc, increments[b - 1])
            table[a][b] = acc
    return table


def rho_pvar_distance(
    x: Sequence[TensorElement],
    y: Sequence[TensorElement],
    p: float,
    method: str = "auto",
) -> float:
    """Grid-restricted inhomogeneous p-variation distance.

    ``x`` and ``y`` are the increments of two multiplicative functionals
    over the consecutive cells of one time grid; increments over longer
    intervals are recovered by Chen multiplication.  The supremum over
    partitions is taken over sub-partitions of that grid only, so the value
    is a lower bound for the distance over all real partitions.

    ``method`` is ``"dp"`` (exact dynamic programming), ``"exhaustive"``
    (enumerate all sub-partitions, grids of at most 12 points) or
    ``"auto"``.
    """
    if p < 1:
        raise ContractError(f"p must be >= 1, got {p}")
    if len(x) != len(y) or not x:
        raise ContractError("x and y must be non-empty and share the same grid")
    depth = x[0].depth
    npts = len(x) + 1
    if method == "auto":
        method = "exhaustive" if npts <= 12 else "dp"
    if method == "exhaustive" and npts > 12:
        raise ContractError("exhaustive search is limited to grids of at most 12 points")
    tx, ty = chen_table(x), chen_table(y)
    result = 0.0
    for n in range(1, depth + 1):
        cost = np.zeros((npts, npts))
        for a in range(npts):
            for b in range(a + 1, npts):
                diff = tx[a][b].levels[n] - ty[a][b].levels[n]
                cost[a, b] = float(np.sqrt(np.sum(diff * diff))) ** (p / n)
        total = _exhaustive_partition_sum(cost) if method == "exhaustive" else _best_partition_sum(cost)
        result = max(result, total ** (n / p))
    return result


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def csv_header(dim: int, depth: int) -> list[str]:
    """Column names ``L0, L1_1, ..., L2_12, ...`` in level-major lexicographic order."""
    sep = "" if dim < 10 else "."
    names = ["L0"]
    for n in range(1, depth + 1):
        for idx in itertools.product(range(1, dim + 1), repeat=n):
            names.append(f"L{n}_" + sep.join(str(i) for i in idx))
    return names


def to_csv_row(g: TensorElement) -> list[float]:
    return [float(v) for lev in g.levels for v in np.ravel(lev)]


def from_csv_row(values: Sequence[float], dim: int, depth: int) -> TensorElement:
    values = np.asarray(values, dtype=float)
    levels, pos = [], 0
    for n in range(depth + 1):
        size = dim**n
        levels.append(values[pos: pos + size].reshape((dim,) * n))
        pos += size
    if pos != len(values):
        raise ContractError("row length does not match (dim, depth)")
    return TensorElement(dim, depth, tuple(levels))
