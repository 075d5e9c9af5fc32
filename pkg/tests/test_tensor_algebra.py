import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from roughrates.errors import ContractError, SingularElementError
from roughrates.tensor_algebra import (
    TensorElement,
    csv_header,
    dilate,
    from_csv_row,
    homogeneous_norm,
    rho_pvar_distance,
    tensor_exp,
    tensor_inverse,
    tensor_log,
    tensor_mul,
    to_csv_row,
)

from conftest import random_group_element

seeds = st.integers(0, 2**32 - 1)


def test_unit_is_neutral(rng):
    g = random_group_element(rng, 2, 3)
    one = TensorElement.unit(2, 3)
    for prod in (tensor_mul(one, g), tensor_mul(g, one)):
        for a, b in zip(prod.levels, g.levels):
            assert np.array_equal(a, b)


def test_one_dimensional_exponentials_multiply():
    a, b = 0.7, -1.9
    g = TensorElement.from_levels([1.0, [a], [[a * a / 2]]])
    h = TensorElement.from_levels([1.0, [b], [[b * b / 2]]])
    prod = tensor_mul(g, h)
    assert prod.levels[1][0] == pytest.approx(a + b)
    assert prod.levels[2][0, 0] == pytest.approx((a + b) ** 2 / 2)


def test_product_of_basis_exponentials_has_area_one():
    # pi_2(exp(e1) exp(e2)) = e1e1/2 + e1 (x) e2 + e2e2/2
    prod = tensor_mul(tensor_exp([1.0, 0.0], 2), tensor_exp([0.0, 1.0], 2))
    assert prod.levels[2][0, 1] == 1.0
    assert prod.levels[2][1, 0] == 0.0


def test_product_formula_against_direct_sum(rng):
    g = TensorElement(2, 3, tuple(rng.normal(size=(2,) * n) if n else 1.3 for n in range(4)))
    h = TensorElement(2, 3, tuple(rng.normal(size=(2,) * n) if n else -0.4 for n in range(4)))
    prod = tensor_mul(g, h)
    for n in range(4):
        expected = sum(np.multiply.outer(g.levels[n - i], h.levels[i]) for i in range(n + 1))
        np.testing.assert_allclose(prod.levels[n], expected, rtol=1e-13, atol=1e-13)
    assert prod.scalar == g.scalar * h.scalar


def test_mismatched_shapes_are_rejected():
    with pytest.raises(ContractError):
        tensor_mul(TensorElement.unit(2, 2), TensorElement.unit(3, 2))
    with pytest.raises(ContractError):
        tensor_mul(TensorElement.unit(2, 2), TensorElement.unit(2, 3))


def test_memory_cap():
    with pytest.raises(ContractError):
        TensorElement.unit(10, 8)


def test_inverse_of_unit_and_exponential(rng):
    one = TensorElement.unit(3, 4)
    assert tensor_inverse(one).max_abs_diff(one) == 0.0
    v = rng.normal(size=3)
    assert tensor_inverse(tensor_exp(v, 4)).max_abs_diff(tensor_exp(-v, 4)) < 1e-13


def test_inverse_of_random_group_element(rng):
    g = random_group_element(rng, 2, 4)
    one = TensorElement.unit(2, 4)
    assert tensor_mul(g, tensor_inverse(g)).max_abs_diff(one) < 1e-12
    assert tensor_mul(tensor_inverse(g), g).max_abs_diff(one) < 1e-12


def test_inverse_of_non_grouplike_scalar():
    g = TensorElement.from_levels([2.0, [1.0, -1.0], np.ones((2, 2))])
    assert tensor_mul(g, tensor_inverse(g)).max_abs_diff(TensorElement.unit(2, 2)) < 1e-14


def test_singular_inverse():
    with pytest.raises(SingularElementError):
        tensor_inverse(TensorElement.zero(2, 2))


def test_exp_examples():
    assert tensor_exp(np.zeros(2), 3).max_abs_diff(TensorElement.unit(2, 3)) == 0.0
    g = tensor_exp([2.0], 3)
    np.testing.assert_allclose([float(np.ravel(a)[0]) for a in g.levels], [1, 2, 2, 4 / 3], rtol=1e-15)
    assert tensor_exp([1.0, 1.0], 2).levels[2][0, 1] == 0.5


def test_log_examples():
    lie = tensor_log(tensor_exp([1.5], 4))
    assert lie.levels[1][0] == pytest.approx(1.5, abs=1e-14)
    for n in (2, 3, 4):
        assert abs(float(np.ravel(lie.levels[n])[0])) < 1e-13
    with pytest.raises(ContractError):
        tensor_log(TensorElement.from_scalar(2.0, 1, 2))


def test_level_two_symmetric_part_of_exponential(rng):
    v = rng.normal(size=3)
    g = tensor_mul(tensor_exp(v, 2), tensor_exp(rng.normal(size=3), 2))
    sym = 0.5 * (g.levels[2] + g.levels[2].T)
    np.testing.assert_allclose(sym, 0.5 * np.outer(g.levels[1], g.levels[1]), atol=1e-14)


def test_homogeneous_norm_examples(rng):
    assert homogeneous_norm(TensorElement.unit(2, 3)) == 0.0
    v = rng.normal(size=3)
    v *= 3 / np.linalg.norm(v)
    for depth in (1, 2, 5):
        assert homogeneous_norm(tensor_exp(v, depth)) == pytest.approx(3.0, rel=1e-13)
    a = 0.8
    area = np.array([[0.0, a], [-a, 0.0]])
    g = TensorElement.from_levels([1.0, np.zeros(2), area])
    assert homogeneous_norm(g) == pytest.approx(math.sqrt(2 * a * math.sqrt(2)), rel=1e-14)


def test_csv_round_trip(rng):
    g = random_group_element(rng, 2, 3)
    header = csv_header(2, 3)
    row = to_csv_row(g)
    assert header[:4] == ["L0", "L1_1", "L1_2", "L2_11"]
    assert "L2_12" in header and len(header) == len(row) == 1 + 2 + 4 + 8
    assert from_csv_row(row, 2, 3).max_abs_diff(g) == 0.0


def _increments(rng, n_cells, d=2, depth=2):
    return [random_group_element(rng, d, depth, segments=1, scale=0.5) for _ in range(n_cells)]


def test_rho_pvar_identical_paths(rng):
    x = _increments(rng, 5)
    assert rho_pvar_distance(x, x, 2.0) == 0.0


def test_rho_pvar_single_jump():
    eps = 0.37
    x = [tensor_exp([0.0], 1) for _ in range(4)]
    y = list(x)
    y[2] = tensor_exp([eps], 1)
    assert rho_pvar_distance(x, y, 1.5) == pytest.approx(eps, rel=1e-14)


def _brute_force_rho(x, y, p):
    # independent oracle: every sub-partition, products recomputed per interval
    npts = len(x) + 1
    out = 0.0
    for n in range(1, x[0].depth + 1):
        best = 0.0
        for r in range(npts - 1):
            for chosen in itertools.combinations(range(1, npts - 1), r):
                pts = (0,) + chosen + (npts - 1,)
                total = 0.0
                for a, b in zip(pts[:-1], pts[1:]):
                    gx, gy = x[a], y[a]
                    for c in range(a + 1, b):
                        gx, gy = tensor_mul(gx, x[c]), tensor_mul(gy, y[c])
                    total += np.linalg.norm(np.ravel(gx.levels[n] - gy.levels[n])) ** (p / n)
                best = max(best, total)
        out = max(out, best ** (n / p))
    return out


def test_rho_pvar_matches_brute_force_on_four_points(rng):
    for _ in range(5):
        x, y = _increments(rng, 3), _increments(rng, 3)
        expected = _brute_force_rho(x, y, 2.5)
        assert rho_pvar_distance(x, y, 2.5) == pytest.approx(expected, rel=1e-12)
        assert rho_pvar_distance(x, y, 2.5, method="dp") == pytest.approx(expected, rel=1e-12)


def test_rho_pvar_dp_equals_exhaustive(rng):
    x, y = _increments(rng, 9, depth=3), _increments(rng, 9, depth=3)
    for p in (1.0, 2.2, 3.5):
        assert rho_pvar_distance(x, y, p, "dp") == pytest.approx(rho_pvar_distance(x, y, p, "exhaustive"), rel=1e-12)


def test_rho_pvar_rejects_small_p(rng):
    x = _increments(rng, 2)
    with pytest.raises(ContractError):
        rho_pvar_distance(x, x, 0.5)


@given(seeds)
def test_associativity(seed):
    rng = np.random.default_rng(seed)
    g, h, k = (random_group_element(rng, 2, 4) for _ in range(3))
    lhs = tensor_mul(tensor_mul(g, h), k)
    rhs = tensor_mul(g, tensor_mul(h, k))
    assert lhs.max_abs_diff(rhs) < 1e-12


@given(seeds, st.integers(1, 3), st.integers(1, 5))
def test_exp_log_round_trip(seed, d, depth):
    v = np.random.default_rng(seed).normal(size=d)
    lie = tensor_log(tensor_exp(v, depth))
    assert np.max(np.abs(lie.levels[1] - v)) < 1e-12
    if d == 1:
        assert all(np.max(np.abs(lie.levels[n])) < 1e-12 for n in range(2, depth + 1))


@given(seeds, st.floats(-2.0, 2.0))
def test_dilation_is_a_homomorphism(seed, lam):
    rng = np.random.default_rng(seed)
    g, h = random_group_element(rng, 2, 4), random_group_element(rng, 2, 4)
    lhs = dilate(tensor_mul(g, h), lam)
    rhs = tensor_mul(dilate(g, lam), dilate(h, lam))
    assert lhs.max_abs_diff(rhs) < 1e-12


@given(seeds, st.floats(1.0, 4.0))
def test_rho_pvar_is_a_pseudometric(seed, p):
    rng = np.random.default_rng(seed)
    x, y, z = (_increments(rng, 5) for _ in range(3))
    dxy, dyx = rho_pvar_distance(x, y, p), rho_pvar_distance(y, x, p)
    assert dxy == dyx
    assert dxy <= rho_pvar_distance(x, z, p) + rho_pvar_distance(z, y, p) + 1e-12
