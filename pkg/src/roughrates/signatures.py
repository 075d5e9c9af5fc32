"""Signatures of piecewise-linear paths.

A sampled path is identified with its piecewise-linear interpolation, so
its signature over [s, t] is the ordered Chen product of the exponentials
of the segment increments, with partial segments at s and t split exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .tensor_algebra import TensorElement, levels_exp, levels_mul_exp, tensor_exp, tensor_log, tensor_mul
from .words import word_to_indices


@dataclass(frozen=True, eq=False)
class SampledPath:
    """A path in R^d given at strictly increasing times, linear in between."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if times.ndim != 1 or len(times) < 2:
            raise ContractError("a path needs at least two sample times")
        if points.shape[0] != len(times):
            raise ContractError(f"{len(times)} times but {points.shape[0]} points")
        if not np.all(np.diff(times) > 0):
            raise ContractError("sample times must be strictly increasing")
        if not np.all(np.isfinite(points)):
            raise ContractError("non-finite path values")
        times.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.times)

    def __call__(self, t) -> np.ndarray:
        """Linear interpolation; constant extension outside the sample range."""
        t = np.asarray(t, dtype=float)
        out = np.stack([np.interp(t, self.times, self.points[:, j]) for j in range(self.dim)], axis=-1)
        return out

    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    def scaled(self, lam: float) -> SampledPath:
        return SampledPath(self.times, lam * self.points)

    def reversed(self) -> SampledPath:
        """The time-reversed path on the reflected grid t -> t0 + t1 - t."""
        t0, t1 = self.times[0], self.times[-1]
        return SampledPath((t0 + t1) - self.times[::-1], self.points[::-1])

    def segment_points(self, s: float, t: float) -> np.ndarray:
        """Breakpoints of the path on [s, t] including the (interpolated) ends."""
        if not s < t:
            raise ContractError(f"need s < t, got s={s}, t={t}")
        lo, hi = self.times[0], self.times[-1]
        if s < lo or t > hi:
            raise ContractError(f"[{s}, {t}] not inside [{lo}, {hi}]")
        inner = (self.times > s) & (self.times < t)
        return np.concatenate([self(s)[None], self.points[inner], self(t)[None]])


def _resolve(x: SampledPath, s, t) -> tuple[float, float]:
    s = x.times[0] if s is None else float(s)
    t = x.times[-1] if t is None else float(t)
    return s, t


def signature_levels(increments: np.ndarray, depth: int) -> list[np.ndarray]:
    """Signature of a concatenation of linear segments, batched.

    ``increments`` has shape (..., n_segments, d).  The result is a level
    list with the same leading batch shape.
    """
    increments = np.asarray(increments, dtype=float)
    batch = increments.shape[:-2]
    d = increments.shape[-1]
    levels = [np.ones(batch)] + [np.zeros(batch + (d,) * n) for n in range(1, depth + 1)]
    for j in range(increments.shape[-2]):
        levels = levels_mul_exp(levels, increments[..., j, :], depth)
    return levels


def path_signature(x: SampledPath, depth: int, s: float | None = None, t: float | None = None) -> TensorElement:
    """Truncated signature S_N(x)_{s,t} of the piecewise-linear path.

    Level 1 is the exact increment x_t - x_s rather than the accumulated
    sum of segment increments (identical up to round-off).
    """
    s, t = _resolve(x, s, t)
    pts = x.segment_points(s, t)
    levels = signature_levels(np.diff(pts, axis=0), depth)
    if depth >= 1:
        levels[1] = pts[-1] - pts[0]
    return TensorElement(x.dim, depth, tuple(levels))


def segment_signatures(x: SampledPath, depth: int) -> list[TensorElement]:
    """Signature of each grid cell, i.e. the exponential of each increment."""
    return [tensor_exp(v, depth) for v in x.increments()]


def coordinate(sig: TensorElement, word) -> float:
    """The entry of ``sig`` indexed by a word (1 for the empty word)."""
    idx = word_to_indices(word)
    if len(idx) > sig.depth:
        raise ContractError(f"word of length {len(idx)} exceeds depth {sig.depth}")
    if any(not 1 <= i <= sig.dim for i in idx):
        raise ContractError(f"word {word!r} uses letters outside 1..{sig.dim}")
    return float(sig.levels[len(idx)][tuple(i - 1 for i in idx)])


def word_integral(x: SampledPath, word, s: float | None = None, t: float | None = None) -> float:
    """The iterated integral x^w_{s,t}; letters are 1-based (``"ab"`` == (1, 2))."""
    idx = word_to_indices(word)
    if not idx:
        return 1.0
    if any(not 1 <= i <= x.dim for i in idx):
        raise ContractError(f"word {word!r} uses letters outside 1..{x.dim}")
    return coordinate(path_signature(x, len(idx), s, t), idx)


def lyons_lift(x: SampledPath, from_level: int, to_level: int, s: float | None = None, t: float | None = None) -> TensorElement:
    """Extend the level-``from_level`` functional of ``x`` to ``to_level``.

    Each cell's level-``from_level`` element is extended by exp(log(.))
    computed at the higher level, and the cells are multiplied with Chen's
    relation.  For piecewise-linear paths each cell is a pure exponential,
    so this reproduces ``path_signature(x, to_level, s, t)``.
    """
    if to_level < from_level:
        raise ContractError("to_level must be >= from_level")
    if from_level < 1:
        raise ContractError("from_level must be >= 1")
    s, t = _resolve(x, s, t)
    pts = x.segment_points(s, t)
    out = TensorElement.unit(x.dim, to_level)
    for v in np.diff(pts, axis=0):
        low = TensorElement(x.dim, from_level, tuple(levels_exp(v, from_level)))
        lie = tensor_log(low)
        padded = TensorElement(
            x.dim, to_level, lie.levels + tuple(np.zeros((x.dim,) * n) for n in range(from_level + 1, to_level + 1))
        )
        out = tensor_mul(out, tensor_exp(padded))
    return out


def riemann_word_integral(x: SampledPath, word, cells: int = 200) -> float:
    """Brute-force oracle for x^w over the whole path.

    Discretizes [t0, t1] into ``cells`` uniform cells and sums
    dx^{i1}_{u1} ... dx^{in}_{un} over increasing cell indices, with the
    inner integral evaluated at cell midpoints (half weight on the diagonal).
    """
    idx = [i - 1 for i in word_to_indices(word)]
    grid = np.linspace(x.times[0], x.times[-1], cells + 1)
    dx = np.diff(x(grid), axis=0)
    acc = np.ones(cells)
    for k, i in enumerate(idx):
        term = acc * dx[:, i]
        if k == len(idx) - 1:
            return float(term.sum())
        acc = np.cumsum(term) - 0.5 * term
    return 1.0
