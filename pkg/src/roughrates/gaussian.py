"""Gaussian drivers: Brownian motion and fractional Brownian motion.

Paths are sampled exactly on uniform grids by a Cholesky factor of the grid
covariance.  Every (seed, trajectory, component) triple has its own
counter-based random stream, so a trajectory does not depend on how a batch
is split between workers.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ContractError, NumericalError
from .grids import GridFunction2D, grid_index, grid_rho_variation, grid_rho_variation_detail
from .signatures import SampledPath

__all__ = [
    "CovarianceModel",
    "covariance",
    "grid_covariance",
    "rect_increment",
    "cholesky_factor",
    "sample_array",
    "sample_paths",
    "grid_rho_variation",
    "grid_rho_variation_detail",
    "mesh_covariance_modulus",
    "piecewise_linear",
    "bump",
    "mollify",
]

BLOCK = 64


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance of a d-dimensional process with i.i.d. components.

    ``scale`` multiplies the covariance; ``scale=0`` is the degenerate zero
    process.
    """

    kind: str = "bm"
    hurst: float = 0.5
    dim: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bm", "fbm"):
            raise ContractError(f"unknown model kind {self.kind!r}")
        if self.kind == "bm" and self.hurst != 0.5:
            raise ContractError("Brownian motion has hurst = 0.5")
        if not 0.25 < self.hurst <= 0.5:
            raise ContractError(f"hurst must lie in (1/4, 1/2], got {self.hurst}")
        if self.dim < 1:
            raise ContractError("dim must be >= 1")
        if self.scale < 0:
            raise ContractError("scale must be >= 0")

    @classmethod
    def bm(cls, dim: int = 1) -> CovarianceModel:
        return cls("bm", 0.5, dim)

    @classmethod
    def fbm(cls, hurst: float, dim: int = 1) -> CovarianceModel:
        return cls("fbm", hurst, dim)

    @property
    def rho(self) -> float:
        return 1.0 / (2.0 * self.hurst)

    @property
    def target_rate(self) -> float:
        """1/ρ - 1/2, i.e. 2H - 1/2."""
        return 2.0 * self.hurst - 0.5


def covariance(model: CovarianceModel, s, t):
    """R(s, t) of one component; vectorised over broadcastable s, t."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if model.hurst == 0.5:
        out = np.minimum(s, t)
    else:
        h2 = 2.0 * model.hurst
        out = 0.5 * (np.abs(s) ** h2 + np.abs(t) ** h2 - np.abs(t - s) ** h2)
    return model.scale * out if model.scale != 1.0 else out


def grid_covariance(model: CovarianceModel, times, times2=None) -> GridFunction2D:
    times = np.asarray(times, dtype=float)
    times2 = times if times2 is None else np.asarray(times2, dtype=float)
    R = covariance(model, times[:, None], times2[None, :])
    return GridFunction2D(times, times2, R)


def rect_increment(R, s: float, t: float, u: float, v: float) -> float:
    """R(t,v) - R(t,u) - R(s,v) + R(s,u) for a model or a grid covariance."""
    if s > t or u > v:
        raise ContractError("rectangle sides must satisfy s <= t and u <= v")
    if isinstance(R, GridFunction2D):
        return R.increment(s, t, u, v)
    if s == t or u == v:
        return 0.0
    if R.hurst == 0.5:
        val = max(0.0, min(t, v) - max(s, u))
    else:
        h2 = 2.0 * R.hurst
        val = 0.5 * (abs(t - u) ** h2 + abs(s - v) ** h2 - abs(t - v) ** h2 - abs(s - u) ** h2)
    return R.scale * val


@lru_cache(maxsize=16)
def _cholesky(kind: str, hurst: float, k: int) -> tuple[np.ndarray, float]:
    model = CovarianceModel(kind, hurst)
    t = np.arange(1, k + 1) / k
    C = covariance(model, t[:, None], t[None, :])
    trace = float(np.trace(C))
    jitter = 0.0
    for rel in (0.0, 1e-12, 1e-11, 1e-10):
        jitter = rel * trace
        try:
            L = np.linalg.cholesky(C + jitter * np.eye(k))
            break
        except np.linalg.LinAlgError:
            continue
    else:
        raise NumericalError(f"covariance factorisation failed for {kind} H={hurst} k={k}")
    L.setflags(write=False)
    return L, jitter


def cholesky_factor(model: CovarianceModel, k: int) -> tuple[np.ndarray, float]:
    """Lower factor of the unit-scale covariance on {1/k, ..., 1} and the jitter used."""
    if k < 1:
        raise ContractError("mesh k must be >= 1")
    return _cholesky(model.kind, float(model.hurst), int(k))


def _normals(seed: int, traj: int, comp: int, k: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed), int(traj), int(comp)])
    return np.random.Generator(np.random.Philox(ss)).standard_normal(k)


def sample_array(model: CovarianceModel, k: int, trajectories, seed: int) -> np.ndarray:
    """Sample paths on {j/k}; returns shape (len(trajectories), k+1, d).

    ``trajectories`` is a count or an explicit sequence of trajectory
    indices.  Row j of the output depends only on (seed, index, component).
    """
    idx = list(range(trajectories)) if isinstance(trajectories, (int, np.integer)) else [int(i) for i in trajectories]
    if not idx:
        raise ContractError("need at least one trajectory")
    L, _ = cholesky_factor(model, k)
    out = np.zeros((len(idx), k + 1, model.dim))
    if model.scale == 0:
        return out
    amp = np.sqrt(model.scale)
    # each trajectory owns a fixed column of a fixed-width product, so its
    # values do not depend on which other trajectories share the call
    pos: dict[int, list[int]] = {}
    for r, j in enumerate(idx):
        pos.setdefault(j, []).append(r)
    for base in sorted({j // BLOCK for j in idx}):
        cols = [j for j in range(base * BLOCK, (base + 1) * BLOCK) if j in pos]
        for c in range(model.dim):
            Z = np.zeros((k, BLOCK))
            for j in cols:
                Z[:, j % BLOCK] = _normals(seed, j, c, k)
            Y = L @ Z
            for j in cols:
                out[pos[j], 1:, c] = Y[:, j % BLOCK]
    if amp != 1.0:
        out *= amp
    return out


def sample_paths(model: CovarianceModel, k: int, m: int, seed: int) -> list[SampledPath]:
    arr = sample_array(model, k, m, seed)
    times = np.arange(k + 1) / k
    return [SampledPath(times, a) for a in arr]


def mesh_covariance_modulus(model: CovarianceModel, partition: Sequence[float], rho: float, points_per_cell: int = 9) -> float:
    """|D|_{R,ρ} = (max_i V_ρ(R; [t_i, t_{i+1}]^2))^ρ.

    Each cell variation is searched over a uniform sub-grid with
    ``points_per_cell`` points per axis.
    """
    D = np.asarray(partition, dtype=float)
    if D.ndim != 1 or len(D) < 2 or not np.all(np.diff(D) > 0):
        raise ContractError("partition must be strictly increasing with >= 2 points")
    # both models have stationary increments, so a cell's variation only
    # depends on its width and is computed on [0, w]^2 once per width
    worst = 0.0
    for w in np.unique(np.diff(D)):
        cell = np.linspace(0.0, w, points_per_cell)
        worst = max(worst, grid_rho_variation(grid_covariance(model, cell), rho))
    return worst**rho


def piecewise_linear(x: SampledPath, D: Sequence[float], on_grid: bool = False) -> SampledPath:
    """The interpolation of x through the points of D ⊆ x.times.

    With ``on_grid`` the result is sampled on x's own grid instead of D.
    """
    D = np.asarray(D, dtype=float)
    idx = [grid_index(x.times, t) for t in D]
    if len(idx) < 2 or not np.all(np.diff(idx) > 0):
        raise ContractError("D must be an increasing subset of the path's grid with >= 2 points")
    coarse = SampledPath(x.times[idx], x.points[idx])
    if on_grid:
        return SampledPath(x.times, coarse(x.times))
    return coarse


def bump(u):
    """Unnormalised standard bump exp(-1/(1-u^2)) on (-1, 1)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def mollify(x: SampledPath, eps: float, kernel=bump, times=None, resolution: int = 20) -> SampledPath:
    """x^ε_t = ∫ φ_ε(t - u) x̄_u du with x̄ the constant extension of x.

    The kernel is sampled on [-1, 1] with spacing at most 1/resolution
    (i.e. ε/resolution in time) and its trapezoidal weights renormalised to
    unit mass.
    """
    if eps <= 0:
        raise ContractError("eps must be positive")
    if eps < np.max(np.diff(x.times)):
        raise ContractError("eps is smaller than a grid cell of the path")
    n = 2 * resolution + 1
    z = np.linspace(-1.0, 1.0, n)
    w = np.asarray(kernel(z), dtype=float)
    if np.any(w < 0) or not np.isfinite(w).all():
        raise ContractError("kernel must be finite and nonnegative")
    w[0] *= 0.5
    w[-1] *= 0.5
    if w.sum() <= 0:
        raise ContractError("kernel has zero mass")
    w = w / w.sum()
    t = x.times if times is None else np.asarray(times, dtype=float)
    base = x(t)
    shifted = x(t[:, None] - eps * z[None, :])
    out = base + np.einsum("j,tjd->td", w, shifted - base[:, None, :])
    return SampledPath(t, out)
