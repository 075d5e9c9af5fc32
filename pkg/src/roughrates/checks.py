"""Quick numerical self-checks behind ``roughrates identity-checks``."""
from __future__ import annotations

import numpy as np

from .gaussian import CovarianceModel, grid_covariance, sample_paths
from .grids import grid_rho_variation
from .signatures import SampledPath, path_signature, word_integral
from .tensor_algebra import tensor_mul
from .words import all_words, shuffle
from .young import covariance_l2_identity_check, fubini_diag


def _random_path(rng, d: int, n: int) -> SampledPath:
    times = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.05, 0.95, n - 2)]))
    return SampledPath(times, rng.normal(size=(n, d)))


def check_fubini():
    t = np.linspace(0.0, 1.0, 4000)
    r = fubini_diag(t, t, t)
    ok = abs(r.iterated - 1 / 6) <= 1e-3 and abs(r.naive - 1 / 3) <= 1e-3
    return ok, f"iterated={r.iterated:.6f} naive={r.naive:.6f}"


def check_diagonal_trick(seed: int):
    x = sample_paths(CovarianceModel.bm(), 1000, 1, seed)[0]
    v = x.points[:, 0]
    r = fubini_diag(v, v, x.times)
    rel = abs(r.iterated - r.half_diag) / max(abs(r.iterated), 1e-300)
    return rel <= 1e-6, f"relative gap={rel:.2e}"


def check_covariance_identity(mc: int, seed: int):
    r = covariance_l2_identity_check(CovarianceModel.bm(), 128, mc, seed)
    gap = abs(r.mc_estimate - r.young_value)
    ok = gap <= 3 * r.mc_stderr + 0.02 * abs(r.young_value)
    return ok, f"mc={r.mc_estimate:.4f}+/-{r.mc_stderr:.4f} young={r.young_value:.4f}"


def check_bm_variation():
    t = np.arange(17) / 16
    v = grid_rho_variation(grid_covariance(CovarianceModel.bm(), t), 1.0)
    return v == 1.0, f"V_1={v!r}"


def check_chen(seed: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        x = _random_path(rng, 3, 6)
        s, u, t = np.sort(rng.uniform(0, 1, 3))
        lhs = tensor_mul(path_signature(x, 4, s, u), path_signature(x, 4, u, t))
        rhs = path_signature(x, 4, s, t)
        scale = max(1.0, max(float(np.abs(l).max()) for l in rhs.levels))
        worst = max(worst, lhs.max_abs_diff(rhs) / scale)
    return worst <= 1e-10, f"max relative error={worst:.2e}"


def check_shuffle(seed: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        x = _random_path(rng, 2, 5)
        for lu in range(1, 3):
            for lv in range(1, 3):
                for u in all_words("ab", lu):
                    for v in all_words("ab", lv):
                        lhs = word_integral(x, u) * word_integral(x, v)
                        rhs = sum(c * word_integral(x, w) for w, c in shuffle(u, v).items())
                        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst <= 1e-9, f"max relative error={worst:.2e}"


def run_identity_checks(mc: int = 2000, seed: int = 0) -> list[tuple[str, bool, str]]:
    checks = [
        ("fubini_one_sixth", check_fubini),
        ("diagonal_trick_bm", lambda: check_diagonal_trick(seed)),
        ("covariance_l2_identity", lambda: check_covariance_identity(mc, seed)),
        ("bm_grid_variation", check_bm_variation),
        ("chen_identity", lambda: check_chen(seed)),
        ("shuffle_homomorphism", lambda: check_shuffle(seed)),
    ]
    out = []
    for name, fn in checks:
        ok, detail = fn()
        out.append((name, bool(ok), detail))
    return out
