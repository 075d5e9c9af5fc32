"""Young integration on grids: 2D and nD Stieltjes sums, iterated 2D
integrals, V_∞ and the interpolation inequality, and two checkable
identities for covariances (the L² identity and the diagonal trick).

All 2D/nD integrals are left-point Riemann-Stieltjes sums over the full
grid, which converge to the Young integral under refinement.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .gaussian import CovarianceModel, grid_covariance, sample_array
from .grids import (
    GridFunction2D,
    GridFunctionND,
    grid_rho_variation,
    rect_increment_nd,
    v_infinity,
)

__all__ = [
    "GridFunction2D",
    "GridFunctionND",
    "rect_increment_nd",
    "young_integral_2d",
    "young_integral_nd",
    "iterated_2d",
    "v_infinity",
    "interpolation_check",
    "IdentityCheck",
    "covariance_l2_identity_check",
    "FubiniResult",
    "fubini_diag",
    "min_lift",
]


def _same_grid(f: GridFunction2D, g: GridFunction2D):
    if not (np.array_equal(f.x, g.x) and np.array_equal(f.y, g.y)):
        raise ContractError("integrand and integrator must share their grids")


def young_integral_2d(f: GridFunction2D, g: GridFunction2D, rectangle=None) -> float:
    """Σ f(t_i, t_j) g(cell_ij) over the grid cells inside ``rectangle``."""
    _same_grid(f, g)
    f, g = f.restrict(rectangle), g.restrict(rectangle)
    return float((f.values[:-1, :-1] * g.cell_increments()).sum())


def young_integral_nd(f: GridFunctionND, g: GridFunctionND) -> float:
    """Left-point sum of f against the nD cell increments of g."""
    if f.ndim != g.ndim or not all(np.array_equal(a, b) for a, b in zip(f.axes, g.axes)):
        raise ContractError("integrand and integrator must share their grids")
    dg = g.values
    for ax in range(g.ndim):
        dg = np.diff(dg, axis=ax)
    left = f.values[tuple(slice(0, -1) for _ in range(f.ndim))]
    return float((left * dg).sum())


def _vanish_edges(F: np.ndarray) -> np.ndarray:
    return F - F[:1, :] - F[:, :1] + F[0, 0]


def iterated_2d(f: GridFunction2D, gs, rectangle=None, vanish_initial_edges: bool = False, return_table: bool = False):
    """∫_{Δ^n × Δ^n} f dg_1 ... dg_n over ``rectangle`` for n = len(gs) <= 3.

    Φ^(1)(u,v) = ∫_{[s,u]x[s',v]} f dg_1 and Φ^(k) = ∫ Φ^(k-1) dg_k, each
    evaluated as a left-point sum; the value is Φ^(n) at the far corner.
    """
    gs = list(gs)
    if not 1 <= len(gs) <= 3:
        raise ContractError("iterated 2D integrals are supported for n = 1, 2, 3")
    for g in gs:
        _same_grid(f, g)
    F = f.restrict(rectangle).values
    if vanish_initial_edges:
        F = _vanish_edges(F)
    phi = F
    for g in gs:
        dg = g.restrict(rectangle).cell_increments()
        nxt = np.zeros_like(phi)
        nxt[1:, 1:] = np.cumsum(np.cumsum(phi[:-1, :-1] * dg, axis=0), axis=1)
        phi = nxt
    if return_table:
        return phi
    return float(phi[-1, -1])


def interpolation_check(f: GridFunction2D, rho: float, gamma: float, rectangle=None) -> tuple[float, float]:
    """(V_γ, V_∞^{1-ρ/γ} V_ρ^{ρ/γ}) on the grid; the first never exceeds the second."""
    if not gamma > rho >= 1:
        raise ContractError("need gamma > rho >= 1")
    vg = grid_rho_variation(f, gamma, rectangle)
    vr = grid_rho_variation(f, rho, rectangle)
    vi = v_infinity(f, rectangle)
    return vg, vi ** (1 - rho / gamma) * vr ** (rho / gamma)


@dataclass(frozen=True)
class IdentityCheck:
    mc_estimate: float
    mc_stderr: float
    young_value: float


def covariance_l2_identity_check(model: CovarianceModel, k: int = 256, m: int = 10_000, seed: int = 0) -> IdentityCheck:
    """Both sides of E[(∫ Z¹ dZ²)²] = ∫∫ R(0,u;0,v) dR(u,v) over [0,1].

    The left side is a Monte Carlo mean over piecewise-linear paths on the
    mesh k; the right side is the 2D Young sum on the same grid.
    """
    pair = CovarianceModel(model.kind, model.hurst, 2, model.scale)
    z = sample_array(pair, k, m, seed)
    z1, dz1, dz2 = z[:, :-1, 0], np.diff(z[:, :, 0], axis=1), np.diff(z[:, :, 1], axis=1)
    area = ((z1 + 0.5 * dz1) * dz2).sum(axis=1)
    sq = area**2
    stderr = float(sq.std(ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    t = np.arange(k + 1) / k
    R = grid_covariance(model, t)
    return IdentityCheck(float(sq.mean()), stderr, young_integral_2d(R, R))


@dataclass(frozen=True)
class FubiniResult:
    iterated: float
    half_diag: float
    naive: float


def fubini_diag(f, g, grid, rule: str = "exact-linear") -> FubiniResult:
    """Compare ∫_{u<v} f(u) dg(u) dg(v) with ½ ∫∫ f(u∧v) dg(u) dg(v).

    ``naive`` is ∫ f dh with h = ∫ g dg, the form one might wrongly expect
    to equal the iterated integral.  With ``rule="exact-linear"`` each
    cell integral is exact for piecewise-linear f and g; ``rule="left"``
    uses left-point sums, for which the diagonal cells contribute an extra
    ½ Σ f Δg² to the half-diagonal form.
    """
    t = np.asarray(grid, dtype=float)
    f = np.broadcast_to(np.asarray(f, dtype=float), t.shape)
    g = np.broadcast_to(np.asarray(g, dtype=float), t.shape)
    if t.ndim != 1 or len(t) < 2:
        raise ContractError("need a 1D grid with at least two points")
    dg, df = np.diff(g), np.diff(f)
    if rule == "exact-linear":
        mid = 0.5 * (f[:-1] + f[1:])
        phi = np.concatenate([[0.0], np.cumsum(mid * dg)])[:-1]
        iterated = float(np.sum(phi * dg + dg**2 * (f[:-1] / 2 + df / 6)))
        diag = dg**2 * (f[:-1] + df / 3)
        # ∫ f g dg per cell, exact by Simpson since f g is quadratic
        gm = 0.5 * (g[:-1] + g[1:])
        naive = float(np.sum(dg * (f[:-1] * g[:-1] + 4 * mid * gm + f[1:] * g[1:]) / 6))
        weight = mid
    elif rule == "left":
        phi = np.concatenate([[0.0], np.cumsum(f[:-1] * dg)])[:-1]
        iterated = float(np.sum(phi * dg))
        diag = f[:-1] * dg**2
        naive = float(np.sum(f[:-1] * np.diff(0.5 * g**2)))
        weight = f[:-1]
    else:
        raise ContractError(f"unknown rule {rule!r}")
    # full 2D cell sum: off-diagonal cell (i, j) with i < j weighs f on cell i
    n = len(dg)
    total = float(diag.sum())
    a = weight * dg
    for r0 in range(0, n, 512):
        rows = np.arange(r0, min(n, r0 + 512))
        upper = np.arange(n)[None, :] > rows[:, None]
        total += 2.0 * float(((a[rows, None] * dg[None, :]) * upper).sum())
    return FubiniResult(iterated, 0.5 * total, naive)


def min_lift(f: GridFunction2D) -> GridFunctionND:
    """f̄(u1, u2, v1, v2) = f(u1 ∧ u2, v1 ∧ v2) on the doubled grid."""
    n, m = f.shape
    i = np.minimum(np.arange(n)[:, None], np.arange(n)[None, :])
    j = np.minimum(np.arange(m)[:, None], np.arange(m)[None, :])
    values = f.values[i[:, :, None, None], j[None, None, :, :]]
    return GridFunctionND((f.x, f.x, f.y, f.y), values)
