import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from haarproj import sidon
from haarproj.indexsets import IndexSet, generate
from haarproj.integrate import TrigPolynomial


def line(a, b):
    return IndexSet(1, np.arange(a, b + 1).reshape(-1, 1))


def basis(n):
    return IndexSet(n, np.eye(n, dtype=np.int64))


def test_constant_is_exact():
    P = TrigPolynomial(IndexSet(1, np.array([[0]])))
    assert sidon.sup_norm_certified(P, 8) == 1.0


def test_one_plus_z():
    P = TrigPolynomial(line(0, 1))
    assert 2.0 <= sidon.sup_norm_certified(P, 64) <= 2.01


def test_certificate_above_dense_sampling():
    rng = np.random.default_rng(3)
    P = TrigPolynomial(line(0, 12), rng.standard_normal(13) + 1j * rng.standard_normal(13))
    t = np.linspace(0, 1, 200001)
    dense = np.abs(np.exp(2j * math.pi * np.outer(t, np.arange(13))) @ P.coefficients).max()
    for grid in (sidon.min_grid(P), 128, 1024):
        assert sidon.sup_norm_certified(P, grid) >= dense


def test_certificate_2d_above_dense_sampling():
    S = generate("box", d=[2, 1])
    rng = np.random.default_rng(8)
    P = TrigPolynomial(S, rng.standard_normal(len(S)) + 1j * rng.standard_normal(len(S)))
    g = sidon.grid_values(P, 512).max()
    assert sidon.sup_norm_certified(P, sidon.min_grid(P)) >= g


def test_grid_and_dimension_checks():
    P = TrigPolynomial(line(0, 7))
    with pytest.raises(ValueError):
        sidon.sup_norm_certified(P, 16)
    Q = TrigPolynomial(basis(5))
    with pytest.raises(ValueError):
        sidon.sup_norm_certified(Q, 8)


def test_shapiro_small_levels():
    assert sidon.shapiro_coefficients(0).tolist() == [1]
    assert sidon.shapiro_coefficients(1).tolist() == [1, 1]
    assert sidon.shapiro_coefficients(2).tolist() == [1, 1, 1, -1]
    with pytest.raises(ValueError):
        sidon.shapiro_coefficients(-1)


def test_shapiro_recursion_as_polynomials():
    # P_{k+1}(z) = P_k(z) + z^(2^k) Q_k(z), Q_{k+1}(z) = P_k(z) - z^(2^k) Q_k(z)
    z = np.exp(2j * math.pi * np.linspace(0, 1, 37))
    p = np.ones_like(z)
    q = np.ones_like(z)
    for k in range(6):
        p, q = p + z ** (2**k) * q, p - z ** (2**k) * q
        c = sidon.shapiro_coefficients(k + 1)
        assert np.allclose(np.polyval(c[::-1], z), p)


def test_shapiro_16_certificate():
    P = sidon.shapiro_polynomial(4)
    assert len(P.support) == 16
    assert sidon.sup_norm_certified(P) <= math.sqrt(32) * 1.01


def test_shapiro_1024():
    P = sidon.shapiro_polynomial(10)
    assert set(np.unique(P.coefficients.real)) == {-1.0, 1.0}
    assert sidon.sup_norm_certified(P) <= math.sqrt(2048) * 1.01


@pytest.mark.parametrize("k", [1, 3, 6, 10])
def test_shapiro_window(k):
    d = 2**k - 1
    est = sidon.sidon_bounds(line(0, d), budget=8)
    assert est.lower >= math.sqrt((d + 1) / 2) / 1.01
    assert 0.70 <= est.lower / math.sqrt(d) <= 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_independent_sets_have_constant_one(n):
    est = sidon.sidon_bounds(basis(n), budget=32)
    assert 1.0 <= est.lower <= 1.0 + 1e-6
    assert est.upper == pytest.approx(math.sqrt(n))


def test_singleton_and_zero_budget():
    one = sidon.sidon_bounds(line(5, 5), budget=16)
    assert one.lower == one.upper == 1.0
    zero = sidon.sidon_bounds(line(0, 7), budget=0)
    assert zero.lower == 1.0 and zero.upper == pytest.approx(math.sqrt(8))
    high = sidon.sidon_bounds(basis(6), budget=16)
    assert high.lower == 1.0 and high.upper == pytest.approx(math.sqrt(6))


def test_witness_reproducible():
    est = sidon.sidon_bounds(line(0, 9), budget=16, seed=2)
    again = est.witness.abs_coef_sum() / sidon.sup_norm_certified(est.witness, est.grid)
    assert again == est.lower
    assert est.sup_certificate == sidon.sup_norm_certified(est.witness, est.grid)
    rerun = sidon.sidon_bounds(line(0, 9), budget=16, seed=2)
    assert rerun.lower == est.lower
    assert np.array_equal(rerun.witness.coefficients, est.witness.coefficients)


def test_to_dict():
    d = sidon.sidon_bounds(line(0, 3), budget=4).to_dict()
    assert {"lower", "upper", "witness_coefficients"} <= set(d)
    assert len(d["witness_coefficients"]) == len(d["witness_support"])


@settings(max_examples=20)
@given(st.sets(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=10),
       st.integers(0, 8), st.integers(0, 100))
def test_lower_below_upper(rows, budget, seed):
    J = IndexSet(2, np.array(sorted(rows)))
    est = sidon.sidon_bounds(J, budget=budget, seed=seed)
    assert 1.0 <= est.lower <= est.upper + 1e-12
