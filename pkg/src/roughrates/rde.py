"""Step-N Euler, simplified step-N Euler and Wong-Zakai solvers.

All solvers accept batched states of shape (..., e) so the harness can
advance many trajectories at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, DivergenceError
from .grids import grid_index
from .signatures import SampledPath, path_signature
from .tensor_algebra import TensorElement, levels_exp
from .vector_fields import VectorFieldSet

BLOWUP = 1e12
SCHEMES = ("euler", "simplified-euler", "wong-zakai")


def _levels(sig) -> Sequence[np.ndarray]:
    return sig.levels if isinstance(sig, TensorElement) else sig


def step_euler_n(y, sig, V: VectorFieldSet, N: int) -> np.ndarray:
    """y + Σ_{n<=N} Σ_w 𝒱_{w_1}...V_{w_n}(y) x^w over one step.

    ``sig`` is a TensorElement or a (possibly batched) level list of depth >= N.
    """
    levels = _levels(sig)
    if N < 1:
        raise ContractError("N must be >= 1")
    if len(levels) - 1 < N:
        raise ContractError(f"signature depth {len(levels) - 1} < scheme level {N}")
    if V.max_order < N:
        raise ContractError(f"vector fields provide order {V.max_order} < {N}")
    y = np.asarray(y, dtype=float)
    out = y.copy()
    for n in range(1, N + 1):
        D = V.derivative_tensor(n, y)
        lev = np.asarray(levels[n])
        axes = tuple(range(-n - 1, -1))
        out = out + (D * lev[..., None]).sum(axis=axes)
    return out


def step_simplified_euler_n(y, increment, V: VectorFieldSet, N: int) -> np.ndarray:
    """The step-N Euler map with x^w replaced by x^{w_1}...x^{w_n}/n!."""
    return step_euler_n(y, levels_exp(np.asarray(increment, dtype=float), N), V, N)


def _rk4_segments(V: VectorFieldSet, y0: np.ndarray, dx: np.ndarray, substeps: int):
    """Integrate y' = V(y) dx_j on each segment; batched over leading axes.

    Returns (states (..., K+1, e), first divergent segment per batch or -1).
    """
    if substeps < 1:
        raise ContractError("substeps must be >= 1")
    K = dx.shape[-2]
    y = np.array(y0, dtype=float)
    out = np.empty(y.shape[:-1] + (K + 1, y.shape[-1]))
    out[..., 0, :] = y
    bad = np.full(y.shape[:-1], -1, dtype=int)
    for j in range(K):
        h = dx[..., j, :] / substeps
        for _ in range(substeps):
            k1 = V.drift(y, h)
            k2 = V.drift(y + 0.5 * k1, h)
            k3 = V.drift(y + 0.5 * k2, h)
            k4 = V.drift(y + k3, h)
            y = y + (k1 + 2 * k2 + 2 * k3 + k4) / 6
        norm = np.linalg.norm(y, axis=-1)
        blown = ~(norm <= BLOWUP)
        if blown.any():
            bad = np.where(blown & (bad < 0), j, bad)
            y = np.where(blown[..., None], 0.0, y)
        out[..., j + 1, :] = y
    return out, bad


def wong_zakai_batch(V: VectorFieldSet, y0, increments, substeps: int = 8):
    """Batched Wong-Zakai solve from driver increments of shape (..., K, d)."""
    return _rk4_segments(V, np.asarray(y0, dtype=float), np.asarray(increments, dtype=float), substeps)


def wong_zakai_solve(x: SampledPath, V: VectorFieldSet, y0, substeps: int = 8) -> SampledPath:
    """Solve dy = V(y) dx along the piecewise-linear driver with RK4 per segment."""
    if x.dim != V.d:
        raise ContractError(f"driver dimension {x.dim} != number of fields {V.d}")
    states, bad = wong_zakai_batch(V, y0, x.increments(), substeps)
    if bad >= 0:
        raise DivergenceError(f"solution exceeded {BLOWUP:g} on segment {int(bad)}", segment=int(bad))
    return SampledPath(x.times, states)


def simplified_euler_batch(V: VectorFieldSet, y0, increments, N: int):
    """Batched simplified step-N Euler along increments (..., K, d)."""
    increments = np.asarray(increments, dtype=float)
    y = np.array(y0, dtype=float)
    out = np.empty(y.shape[:-1] + (increments.shape[-2] + 1, y.shape[-1]))
    out[..., 0, :] = y
    bad = np.full(y.shape[:-1], -1, dtype=int)
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(increments.shape[-2]):
            y = step_simplified_euler_n(y, increments[..., j, :], V, N)
            blown = ~(np.linalg.norm(y, axis=-1) <= BLOWUP)
            if blown.any():
                bad = np.where(blown & (bad < 0), j, bad)
                y = np.where(blown[..., None], 0.0, y)
            out[..., j + 1, :] = y
    return out, bad


@dataclass(frozen=True)
class SchemeConfig:
    kind: str
    N: int = 1
    partition: tuple = field(default=(0.0, 1.0))
    substeps: int = 8

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ContractError(f"scheme must be one of {SCHEMES}")
        if self.N < 1:
            raise ContractError("N must be >= 1")
        D = np.asarray(self.partition, dtype=float)
        if len(D) < 2 or not np.all(np.diff(D) > 0):
            raise ContractError("partition must be strictly increasing")
        object.__setattr__(self, "partition", tuple(float(t) for t in D))


def solve(config: SchemeConfig, driver: SampledPath, V: VectorFieldSet, y0) -> SampledPath:
    """Run the configured scheme along ``driver`` and return y on the partition."""
    D = np.asarray(config.partition)
    if driver.dim != V.d:
        raise ContractError(f"driver dimension {driver.dim} != number of fields {V.d}")
    if config.kind == "wong-zakai":
        idx = [grid_index(driver.times, t) for t in D]
        coarse = SampledPath(driver.times[idx], driver.points[idx])
        return wong_zakai_solve(coarse, V, y0, config.substeps)
    y = np.asarray(y0, dtype=float)
    states = [y]
    for j, (a, b) in enumerate(zip(D[:-1], D[1:])):
        if config.kind == "euler":
            y = step_euler_n(y, path_signature(driver, config.N, a, b), V, config.N)
        else:
            y = step_simplified_euler_n(y, driver(b) - driver(a), V, config.N)
        if not np.linalg.norm(y) <= BLOWUP:
            raise DivergenceError(f"solution exceeded {BLOWUP:g} on segment {j}", segment=j)
        states.append(y)
    return SampledPath(D, np.array(states))
