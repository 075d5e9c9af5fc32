"""Monte Carlo convergence-rate experiments.

Trajectories are processed in fixed chunks of ``CHUNK`` consecutive indices.
A chunk's result depends only on the spec and its indices, and chunks are
merged in index order, so reports are bit-identical for any worker count.
"""
from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .gaussian import CovarianceModel, sample_array
from .rde import simplified_euler_batch, wong_zakai_batch
from .signatures import signature_levels
from .vector_fields import preset

CHUNK = 16
BAND = 0.15
MAX_EXCLUDED = 0.05
STATS = ("median", "mean", "l2")


def check_meshes(meshes, ref_mesh: int, mc: int) -> tuple:
    ks = tuple(int(k) for k in meshes)
    if len(ks) < 1 or any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ContractError("meshes must be positive and strictly increasing")
    if ref_mesh < 8 * ks[-1]:
        raise ContractError(f"ref_mesh {ref_mesh} must be >= 8 * max(meshes)")
    if any(ref_mesh % k for k in ks):
        raise ContractError("every mesh must divide ref_mesh")
    if mc < 1:
        raise ContractError("mc must be >= 1")
    return ks


@dataclass(frozen=True)
class ExperimentSpec:
    model: CovarianceModel = field(default_factory=lambda: CovarianceModel.bm(2))
    meshes: tuple = (8, 16, 32, 64, 128, 256)
    ref_mesh: int = 2048
    mc: int = 64
    seed: int = 0
    scheme: str = "wong-zakai"
    N: int = 2
    preset: str = "nonlinear"
    stat: str = "median"
    substeps: int = 8
    ref_substeps: int = 8
    y0: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "meshes", check_meshes(self.meshes, self.ref_mesh, self.mc))
        if self.scheme not in ("wong-zakai", "simplified-euler"):
            raise ContractError(f"unknown scheme {self.scheme!r}")
        if self.stat not in STATS:
            raise ContractError(f"stat must be one of {STATS}")
        if self.N < 1:
            raise ContractError("N must be >= 1")

    def fields(self):
        V = preset(self.preset)
        if V.d != self.model.dim:
            raise ContractError(f"preset {self.preset!r} needs a {V.d}-dimensional driver")
        return V


@dataclass(frozen=True)
class RateReport:
    meshes: tuple
    errors: tuple
    stderrs: tuple
    n_excluded: tuple
    slope: float
    intercept: float
    half_width: float
    target: float
    band: tuple
    degenerate: bool = False
    monotone: bool = True
    passed: bool = False
    notes: tuple = ()

    def rows(self):
        return list(zip(self.meshes, self.errors, self.stderrs, self.n_excluded))


def fit_rate(meshes, errors) -> tuple[float, float, float]:
    """OLS of log(error) on log(1/k): (slope, intercept, 2 * slope std error)."""
    k = np.asarray(meshes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(k) < 3 or len(k) != len(e):
        raise ContractError("need at least 3 (k, error) pairs")
    if not np.all(e > 0) or not np.all(np.isfinite(e)):
        raise ContractError("errors must be positive and finite")
    x, y = np.log(1.0 / k), np.log(e)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = len(k) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else float("inf")
    return slope, intercept, 2.0 * se


def summarize(values: np.ndarray, stat: str) -> tuple[float, float]:
    """Statistic of a sample and its standard error."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    if n == 0:
        return float("nan"), float("nan")
    if stat == "mean":
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if stat == "l2":
        sq = v**2
        val = math.sqrt(float(sq.mean()))
        if n < 2 or val == 0:
            return val, 0.0
        return val, float(sq.std(ddof=1) / math.sqrt(n) / (2 * val))
    # median; one standard error is sqrt(n)/2 ranks either side
    med = float(np.median(v))
    half = 0.5 * math.sqrt(n)
    lo = v[max(0, int(math.floor(n / 2 - half)))]
    hi = v[min(n - 1, int(math.ceil(n / 2 + half)) - 1)]
    return med, float(hi - lo) / 2


def predicted_euler_rate(model: CovarianceModel, N: int) -> float:
    """min(η, (N+1)/p - 1) with η = 1/ρ - 1/2 and p at its limit 2ρ."""
    p = 2.0 * model.rho
    return min(model.target_rate, (N + 1) / p - 1.0)


def _chunks(m: int):
    return [tuple(range(a, min(m, a + CHUNK))) for a in range(0, m, CHUNK)]


def _run_chunk(spec: ExperimentSpec, idx: tuple):
    V = spec.fields()
    X = sample_array(spec.model, spec.ref_mesh, idx, spec.seed)
    y0 = np.zeros((len(idx), V.e)) if spec.y0 is None else np.broadcast_to(np.asarray(spec.y0, float), (len(idx), V.e))
    with np.errstate(over="ignore", invalid="ignore"):
        ref, ref_bad = wong_zakai_batch(V, y0, np.diff(X, axis=1), spec.ref_substeps)
        errs = np.zeros((len(idx), len(spec.meshes)))
        bad = np.zeros((len(idx), len(spec.meshes)), dtype=bool)
        for j, k in enumerate(spec.meshes):
            r = spec.ref_mesh // k
            dx = np.diff(X[:, ::r], axis=1)
            if spec.scheme == "wong-zakai":
                approx, abad = wong_zakai_batch(V, y0, dx, spec.substeps)
            else:
                approx, abad = simplified_euler_batch(V, y0, dx, spec.N)
            diff = np.linalg.norm(approx - ref[:, ::r], axis=-1)
            errs[:, j] = diff.max(axis=1)
            bad[:, j] = (abad >= 0) | (ref_bad >= 0) | ~np.isfinite(errs[:, j])
    return errs, bad


def _level_chunk(args):
    model, meshes, ref_mesh, seed, depth, idx = args
    X = sample_array(model, ref_mesh, idx, seed)

    def sig(path):
        lev = signature_levels(np.diff(path, axis=1), depth)
        lev[1] = path[:, -1] - path[:, 0]
        return lev

    ref = sig(X)
    out = np.zeros((len(idx), len(meshes), depth))
    for j, k in enumerate(meshes):
        lev = sig(X[:, :: ref_mesh // k])
        for n in range(1, depth + 1):
            diff = (lev[n] - ref[n]).reshape(len(idx), -1)
            out[:, j, n - 1] = np.linalg.norm(diff, axis=1)
    return out


def _chunk_task(args):
    return _run_chunk(*args)


def parallel_map(func, tasks, workers: int):
    """Ordered map; inline for one worker, else a spawn-based process pool."""
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(func, tasks))


def collect_errors(spec: ExperimentSpec, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-trajectory errors (mc, n_meshes) and exclusion mask."""
    tasks = [(spec, idx) for idx in _chunks(spec.mc)]
    parts = parallel_map(_chunk_task, tasks, workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def build_report(meshes, errs: np.ndarray, bad: np.ndarray, stat: str, target: float, band=None, notes=()) -> RateReport:
    band = (target - BAND, target + BAND) if band is None else tuple(band)
    stats, ses, excl = [], [], []
    for j in range(len(meshes)):
        keep = ~bad[:, j]
        s, se = summarize(errs[keep, j], stat)
        stats.append(s)
        ses.append(se)
        excl.append(int((~keep).sum()))
    notes = list(notes)
    m = errs.shape[0]
    too_many = max(excl) > MAX_EXCLUDED * m
    if too_many:
        notes.append(f"more than {MAX_EXCLUDED:.0%} of trajectories excluded")
    monotone = all(b <= a for a, b in zip(stats, stats[1:]))
    if not monotone:
        notes.append("statistic is not non-increasing in k")
    if all(s == 0 for s in stats):
        notes.append("degenerate: all errors are zero, no slope")
        return RateReport(tuple(meshes), tuple(stats), tuple(ses), tuple(excl), float("nan"), float("nan"),
                          float("nan"), target, band, True, monotone, False, tuple(notes))
    slope, intercept, hw = fit_rate(meshes, stats)
    passed = band[0] <= slope <= band[1] and monotone and not too_many
    return RateReport(tuple(meshes), tuple(stats), tuple(ses), tuple(excl), slope, intercept, hw, target, band,
                      False, monotone, passed, tuple(notes))


def run_rate(spec: ExperimentSpec, workers: int = 1, band=None) -> RateReport:
    errs, bad = collect_errors(spec, workers)
    if spec.scheme == "wong-zakai":
        target = spec.model.target_rate
        notes = (f"target: rate < 1/rho - 1/2 = {target:g}",)
    else:
        target = predicted_euler_rate(spec.model, spec.N)
        notes = (f"predicted exponent min(eta, (N+1)/p - 1) = {target:g}",)
    return build_report(spec.meshes, errs, bad, spec.stat, target, band, notes)


def run_wong_zakai_rate(spec: ExperimentSpec, workers: int = 1, band=None) -> RateReport:
    return run_rate(replace(spec, scheme="wong-zakai"), workers, band)


def run_simplified_euler_rate(spec: ExperimentSpec, workers: int = 1, band=None) -> RateReport:
    if spec.N > 4:
        raise ContractError("simplified Euler runs support N <= 4")
    return run_rate(replace(spec, scheme="simplified-euler"), workers, band)


def run_level_l2_rate(model: CovarianceModel, depth: int = 2, meshes=(8, 16, 32, 64, 128, 256), ref_mesh: int = 2048,
                      mc: int = 64, seed: int = 0, stat: str = "l2", workers: int = 1, band=None) -> dict[int, RateReport]:
    """Per level n <= depth, the rate of |π_n S(X^(k)) - π_n S(X^(ref))| over [0, 1]."""
    if not 1 <= depth <= 4:
        raise ContractError("depth must be in 1..4")
    meshes = check_meshes(meshes, ref_mesh, mc)
    tasks = [(model, tuple(meshes), ref_mesh, seed, depth, idx) for idx in _chunks(mc)]
    diffs = np.concatenate(parallel_map(_level_chunk, tasks, workers))
    bad = np.zeros(diffs.shape[:2], dtype=bool)
    return {n: build_report(meshes, diffs[:, :, n - 1], bad, stat, model.target_rate, band) for n in range(1, depth + 1)}
