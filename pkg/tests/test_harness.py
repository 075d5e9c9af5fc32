import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roughrates.errors import ContractError
from roughrates.gaussian import CovarianceModel, piecewise_linear, sample_array, sample_paths
from roughrates.harness import (
    ExperimentSpec,
    build_report,
    check_meshes,
    collect_errors,
    fit_rate,
    predicted_euler_rate,
    run_level_l2_rate,
    run_simplified_euler_rate,
    run_wong_zakai_rate,
    summarize,
)

SMALL = dict(meshes=(4, 8, 16), ref_mesh=128, mc=16)


def test_fit_exact_power_law():
    ks = [8, 16, 32, 64, 128, 256]
    slope, intercept, hw = fit_rate(ks, [k**-0.5 for k in ks])
    assert slope == pytest.approx(0.5, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert hw == pytest.approx(0.0, abs=1e-12)


def test_fit_constant_errors():
    slope, _, _ = fit_rate([8, 16, 32], [0.2, 0.2, 0.2])
    assert slope == pytest.approx(0.0, abs=1e-12)


def test_fit_two_term_law():
    ks = np.array([8, 16, 32, 64, 128, 256], dtype=float)
    slope, _, _ = fit_rate(ks, 1.0 * ks**-0.3 + 0.5 * ks**-1.0)
    assert 0.25 <= slope <= 0.4


def test_fit_rejects_bad_input():
    with pytest.raises(ContractError):
        fit_rate([8, 16, 32], [0.1, 0.0, 0.01])
    with pytest.raises(ContractError):
        fit_rate([8, 16], [0.1, 0.05])


def test_fit_half_width_matches_textbook_formula(rng):
    ks = np.array([8, 16, 32, 64, 128])
    errs = ks**-0.4 * np.exp(rng.normal(scale=0.1, size=5))
    slope, intercept, hw = fit_rate(ks, errs)
    x, y = np.log(1 / ks), np.log(errs)
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    cov = res[0] / (len(x) - 2) * np.linalg.inv(A.T @ A)
    assert slope == pytest.approx(coef[0], rel=1e-12)
    assert intercept == pytest.approx(coef[1], rel=1e-12)
    assert hw == pytest.approx(2 * math.sqrt(cov[0, 0]), rel=1e-10)


def test_summarize_statistics(rng):
    v = rng.exponential(size=401)
    med, se = summarize(v, "median")
    assert med == np.median(v)
    assert 0 < se < v.std()
    mean, se_mean = summarize(v, "mean")
    assert mean == pytest.approx(v.mean()) and se_mean == pytest.approx(v.std(ddof=1) / math.sqrt(401))
    l2, _ = summarize(v, "l2")
    assert l2 == pytest.approx(math.sqrt(np.mean(v**2)))


def test_median_standard_error_is_calibrated():
    # spread of sample medians of N(0,1), n = 101, is about 1.2533 / sqrt(n)
    rng = np.random.default_rng(1)
    ses = [summarize(rng.normal(size=101), "median")[1] for _ in range(400)]
    assert np.mean(ses) == pytest.approx(1.2533 / math.sqrt(101), rel=0.15)


def test_mesh_validation():
    assert check_meshes([8, 16], 128, 4) == (8, 16)
    with pytest.raises(ContractError):
        check_meshes([8, 16], 100, 4)
    with pytest.raises(ContractError):
        check_meshes([16, 8], 2048, 4)
    with pytest.raises(ContractError):
        check_meshes([8, 24], 128, 4)
    with pytest.raises(ContractError):
        check_meshes([8], 128, 0)
    with pytest.raises(ContractError):
        ExperimentSpec(stat="mode", **SMALL)
    with pytest.raises(ContractError):
        ExperimentSpec(model=CovarianceModel.bm(1), **SMALL).fields()


def test_predicted_rates():
    assert predicted_euler_rate(CovarianceModel.bm(2), 2) == pytest.approx(0.5)
    assert predicted_euler_rate(CovarianceModel.fbm(0.4, 2), 3) == pytest.approx(0.3)
    assert predicted_euler_rate(CovarianceModel.fbm(0.4, 2), 2) == pytest.approx(0.2)


def test_coarsened_drivers_nest_exactly():
    X = sample_array(CovarianceModel.fbm(0.4, 2), 256, 3, seed=0)
    for k in (8, 32, 64):
        np.testing.assert_array_equal(X[:, :: 256 // k], sample_array(CovarianceModel.fbm(0.4, 2), 256, 3, seed=0)[:, :: 256 // k])
    x = sample_paths(CovarianceModel.bm(2), 256, 1, seed=1)[0]
    for k in (8, 32):
        D = np.arange(k + 1) / k
        coarse = piecewise_linear(x, D, on_grid=True)
        np.testing.assert_array_equal(coarse.points[:: 256 // k], x.points[:: 256 // k])


def test_zero_fields_give_a_degenerate_report():
    spec = ExperimentSpec(preset="zero", **SMALL)
    report = run_wong_zakai_rate(spec)
    assert report.degenerate and not report.passed
    assert all(e == 0 for e in report.errors)
    assert math.isnan(report.slope)
    assert any("degenerate" in n for n in report.notes)


def test_report_flags_non_monotone_and_exclusions():
    errs = np.array([[0.1, 0.2, 0.05]] * 20)
    bad = np.zeros_like(errs, dtype=bool)
    report = build_report((8, 16, 32), errs, bad, "median", 0.5, band=(-10, 10))
    assert not report.monotone and not report.passed
    bad[:2, 0] = True
    errs = np.array([[0.4, 0.2, 0.1]] * 20)
    report = build_report((8, 16, 32), errs, bad, "median", 1.0)
    assert report.n_excluded == (2, 0, 0)
    assert not report.passed
    assert report.rows()[0] == (8, 0.4, 0.0, 2)


def test_collect_errors_shape_and_determinism():
    spec = ExperimentSpec(mc=20, meshes=(4, 8, 16), ref_mesh=128, seed=5)
    errs, bad = collect_errors(spec)
    assert errs.shape == (20, 3) and not bad.any()
    again, _ = collect_errors(spec)
    assert np.array_equal(errs, again)
    parallel, _ = collect_errors(spec, workers=2)
    assert np.array_equal(errs, parallel)
    first, _ = collect_errors(ExperimentSpec(mc=16, meshes=(4, 8, 16), ref_mesh=128, seed=5))
    assert np.array_equal(errs[:16], first)


def test_small_runs_produce_reports():
    spec = ExperimentSpec(**SMALL)
    report = run_simplified_euler_rate(ExperimentSpec(N=2, **SMALL))
    assert len(report.rows()) == 3 and math.isfinite(report.slope)
    with pytest.raises(ContractError):
        run_simplified_euler_rate(ExperimentSpec(N=5, **SMALL))
    levels = run_level_l2_rate(CovarianceModel.bm(2), 2, **SMALL)
    assert levels[1].degenerate
    assert all(e == 0 for e in levels[1].errors)
    assert levels[2].errors[0] > levels[2].errors[-1] > 0
    assert spec.scheme == "wong-zakai"


@given(st.lists(st.floats(0.01, 10), min_size=3, max_size=8), st.floats(-1, 1))
def test_fit_is_scale_invariant(errs, shift):
    ks = 2 ** np.arange(3, 3 + len(errs))
    a = fit_rate(ks, errs)
    b = fit_rate(ks, np.asarray(errs) * math.exp(shift))
    assert b[0] == pytest.approx(a[0], abs=1e-9)
    assert b[2] == pytest.approx(a[2], abs=1e-9)
