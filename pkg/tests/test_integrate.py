import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from haarproj import integrate as ig
from haarproj.constants import proj_box_exact
from haarproj.indexsets import IndexSet, generate
from haarproj.integrate import (
    IntegralEstimate,
    MCConfig,
    TrigPolynomial,
    eval_abs_sum,
    l1_norm,
    l2_norm_exact,
    lp_norm,
)
from haarproj.kernels import circle_l1, lebesgue_Lplus


def poly(rows, coefs=None, dim=None):
    arr = np.asarray(rows, dtype=np.int64)
    dim = dim or arr.shape[1]
    return TrigPolynomial(IndexSet(dim, arr.reshape(-1, dim)), coefs)


def brute_abs(P, theta):
    phase = np.exp(2j * math.pi * P.support.elements @ np.asarray(theta, dtype=float))
    return abs(phase @ P.coefficients)


def test_eval_examples():
    assert eval_abs_sum(poly([[0]]), [0.37]) == pytest.approx(1.0)
    e12 = poly([[1, 0], [0, 1]])
    assert eval_abs_sum(e12, [0, 0]) == pytest.approx(2.0)
    assert eval_abs_sum(e12, [0, 0.5]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        eval_abs_sum(e12, [0.1, 0.2, 0.3])


@given(
    st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=25),
    st.tuples(*[st.floats(0, 1, exclude_max=True)] * 3),
)
def test_eval_matches_direct_sum(rows, theta):
    P = poly(rows)
    rng = np.random.default_rng(len(rows))
    Q = TrigPolynomial(P.support, rng.standard_normal(len(P.support)) + 1j)
    for R in (P, Q):
        assert eval_abs_sum(R, theta) == pytest.approx(brute_abs(R, theta), abs=1e-9)


def test_l2_exact():
    assert l2_norm_exact(TrigPolynomial(generate("box", d=[1, 1]))) == pytest.approx(3.0)
    assert l2_norm_exact(poly([[0]], [5j])) == pytest.approx(5.0)
    assert l2_norm_exact(poly([[0], [1], [2]], [1, 2, 2])) == pytest.approx(3.0)


def test_estimate_invariants():
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, -0.1, 10, "mc")
    with pytest.raises(ValueError):
        IntegralEstimate(1.0, 0.1, 0, "exact")
    e = IntegralEstimate(1.0, 0.1, 10, "qmc")
    assert (e.bracket_lo, e.bracket_hi) == pytest.approx((0.7, 1.3))


def test_config_validation():
    with pytest.raises(ValueError):
        MCConfig(samples=8, blocks=16)
    with pytest.raises(ValueError):
        MCConfig(engine="sobol")
    with pytest.raises(ValueError):
        MCConfig(samples=1 << 26, blocks=2)


def test_trig_polynomial_validation():
    S = IndexSet(1, np.array([[0], [1]]))
    with pytest.raises(ValueError):
        TrigPolynomial(S, [0, 0])
    with pytest.raises(KeyError):
        TrigPolynomial(S, {(5,): 1.0})
    P = TrigPolynomial.from_terms(2, {(0, 1): 2.0, (1, 0): -1.0})
    assert P.abs_coef_sum() == pytest.approx(3.0)


def test_lattice_prefix_is_full_lattice():
    vec = ig.lattice_vector()
    assert len(vec) == 9125 and vec[0] == 1
    k = 6
    pts = ig.lattice_points(0, 1 << k, 5)
    expected = (np.arange(1 << k)[:, None] * vec[None, :5].astype(np.int64) % (1 << k)) / (1 << k)
    as_set = lambda a: {tuple(np.round(r, 12)) for r in a}
    assert as_set(pts) == as_set(expected)


def test_block_streams_are_distinct_and_stable():
    a = ig.block_rng(7, 0).random(4)
    b = ig.block_rng(7, 1).random(4)
    assert not np.allclose(a, b)
    assert np.array_equal(a, ig.block_rng(7, 0).random(4))


@pytest.mark.parametrize("engine", ["mc", "qmc"])
def test_l1_two_characters(engine):
    est = l1_norm(poly([[1, 0], [0, 1]]), MCConfig(samples=1 << 18, engine=engine, seed=3))
    assert abs(est.value - 4 / math.pi) <= 3 * est.stderr
    assert est.samples == 1 << 18 and est.method == engine


def test_l1_analytic_box_1d():
    est = l1_norm(poly([[0], [1], [2]]), MCConfig(samples=1 << 16))
    assert abs(est.value - lebesgue_Lplus(2)) <= 3 * est.stderr


def test_l1_delta16_below_sqrt():
    est = l1_norm(TrigPolynomial(generate("delta_x", x=16)), MCConfig(samples=1 << 16))
    assert est.value <= 4 + 3 * est.stderr


def test_lp_consistency():
    P = poly([[0], [1], [3]], [1, 1j, -2])
    cfg = MCConfig(samples=1 << 16)
    two = lp_norm(P, 2, cfg)
    assert abs(two.value - l2_norm_exact(P)) <= 3 * two.stderr + 1e-12
    assert lp_norm(P, 1, cfg) == l1_norm(P, cfg)
    one = l1_norm(poly([[0], [1]]), cfg)
    assert abs(one.value - 4 / math.pi) <= 3 * one.stderr
    with pytest.raises(ValueError):
        lp_norm(P, 0.5, cfg)


def test_control_variate_unbiased():
    P = TrigPolynomial(generate("delta_x", x=30))
    plain = l1_norm(P, MCConfig(samples=1 << 16, engine="mc", seed=1))
    cv = l1_norm(P, MCConfig(samples=1 << 16, engine="mc", seed=1, control_variate=True))
    assert abs(plain.value - cv.value) <= 3 * math.hypot(plain.stderr, cv.stderr)
    assert cv.stderr < plain.stderr


def test_determinism_independent_of_jobs():
    P = TrigPolynomial(generate("delta_x", x=50))
    cfg = MCConfig(samples=1 << 14, seed=11, blocks=16)
    try:
        ig.set_jobs(1)
        a = l1_norm(P, cfg)
        ig.set_jobs(4)
        b = l1_norm(P, cfg)
    finally:
        ig.set_jobs(1)
    assert a == b
    assert l1_norm(P, MCConfig(samples=1 << 14, seed=12, blocks=16)) != a


def test_parseval_guard_random_sets():
    rng = np.random.default_rng(2024)
    cfg = MCConfig(samples=1 << 12, blocks=16)
    for i in range(200):
        n = int(rng.integers(1, 5))
        size = int(rng.integers(1, 21))
        rows = rng.integers(-3, 4, size=(size, n))
        P = TrigPolynomial(IndexSet(n, rows))
        two = lp_norm(P, 2, cfg)
        exact = l2_norm_exact(P)
        assert abs(two.value - exact) <= 3 * two.stderr + 1e-9 * exact, i
        one = l1_norm(P, cfg)
        assert one.value <= exact * (1 + 3 * one.stderr / one.value) + 1e-12


def test_box_product_consistency():
    for d in [(1, 1), (2, 1), (2, 2)]:
        est = l1_norm(TrigPolynomial(generate("box", d=list(d))), MCConfig(samples=1 << 16))
        assert abs(est.value - proj_box_exact(d)) <= 3 * est.stderr


def space(omegas):
    w = np.asarray(omegas, dtype=float)
    return SimpleNamespace(frequencies=lambda: w, coefficient_array=lambda: np.ones(len(w), complex))


def test_ergodic_examples():
    assert ig.ergodic_l1(space([0.0]), T=10.0).value == pytest.approx(1.0)
    assert ig.ergodic_l1(space([0.0, 1.0])).value == pytest.approx(4 / math.pi, abs=1e-2)
    logp = ig.ergodic_l1(space(np.log([2.0, 3.0])), T=1e5)
    assert logp.value == pytest.approx(4 / math.pi, abs=1e-2)
    assert len(logp.diagnostics) == 3 and logp.method == "quadrature"


def test_ergodic_validation():
    with pytest.raises(ValueError):
        ig.ergodic_average([0.0, np.inf])
    with pytest.raises(ValueError):
        ig.ergodic_average([0.0, 1.0], T=-1)


def test_ergodic_matches_circle_for_natural_subsets():
    rng = np.random.default_rng(5)
    for _ in range(8):
        J = sorted(set(rng.integers(0, 6, size=int(rng.integers(1, 6))).tolist()))
        erg = ig.ergodic_l1(space(J)).value
        assert abs(erg - circle_l1(J)) <= 1e-2
