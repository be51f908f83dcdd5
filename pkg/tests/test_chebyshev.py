import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chebk import chebyshev as cb
from chebk.chebyshev import ChebPoly, RationalWeight
from chebk.errors import WeightInvalid, ZeroPolynomial
from chebk.intervals import validate

coeff_arrays = arrays(np.float64, st.integers(1, 8), elements=st.floats(-2, 2))


def nonzero(c):
    c = np.array(c)
    if not np.any(np.abs(c) > 1e-3):
        c[-1] = 1.0
    return c


def test_evaluate_examples():
    assert cb.evaluate(ChebPoly([0, 0, 0, 1]), 0.5) == pytest.approx(-1.0)
    assert cb.evaluate(ChebPoly([0, 1], "U"), 0.5) == pytest.approx(1.0)
    assert cb.evaluate(ChebPoly([1.0]), 0.37) == 1.0
    x = np.linspace(-1.5, 1.5, 7)
    assert np.allclose(cb.evaluate(ChebPoly([0, 0, 0, 1]), x), 4 * x**3 - 3 * x)


def test_multiply_examples():
    T1 = ChebPoly.basis_poly(1)
    assert np.allclose(cb.multiply(T1, T1).coeffs, [0.5, 0, 0.5])
    P = ChebPoly([0.3, -1, 2])
    assert cb.multiply(P, ChebPoly([1.0])) == P
    x3 = cb.multiply(cb.monomial_to_cheb([0, 1]), cb.monomial_to_cheb([0, 0, 1]))
    assert np.allclose(x3.coeffs, [0, 0.75, 0, 0.25])


def test_mult_matrix_examples():
    assert np.array_equal(cb.mult_matrix(ChebPoly([1.0]), 3), np.eye(4))
    M = cb.mult_matrix(ChebPoly.basis_poly(1), 1)
    assert np.allclose(M, [[0, 0.5], [1, 0], [0, 0.5]])


def test_transplant_examples():
    P = ChebPoly([0, 1])
    assert np.allclose(cb.transplant(P, -1, 1).coeffs, [0, 1])
    assert np.allclose(cb.transplant(P, 0, 1).coeffs, [0.5, 0.5])


def test_basis_change_examples():
    assert np.allclose(cb.t_to_u(ChebPoly([1.0])).coeffs, [1])
    assert np.allclose(cb.t_to_u(ChebPoly.basis_poly(2)).coeffs, [-0.5, 0, 0.5])
    assert np.allclose(cb.second_kind_matrix((-1, 1), 1), np.diag([1, 0.5]))


def test_roots_examples():
    assert np.allclose(np.sort(cb.real_roots(ChebPoly.basis_poly(2))), [-np.sqrt(0.5), np.sqrt(0.5)])
    assert np.allclose(cb.real_roots(cb.monomial_to_cheb([0, -1, 0, 1])), [-1, 0, 1], atol=1e-12)
    assert cb.real_roots(cb.monomial_to_cheb([1, 0, 1])).size == 0
    with pytest.raises(ZeroPolynomial):
        cb.roots(ChebPoly([0.0]))


def test_sup_norm_examples():
    v, _ = cb.sup_norm_weighted(ChebPoly.basis_poly(3), None, (-1, 1))
    assert v == pytest.approx(1.0, abs=1e-14)
    v, x = cb.sup_norm_weighted(ChebPoly([0, 1]), None, (0, 0.5))
    assert (v, x) == (0.5, 0.5)


def test_l1_norm_examples():
    U5 = ChebPoly(np.eye(6)[5] / 32, "U")
    assert cb.l1_norm_weighted(U5, None, validate([(-1, 1)])) == pytest.approx(0.0625, rel=1e-12)
    K = validate([(-1, -0.5), (0.5, 1)])
    assert cb.l1_norm_weighted(ChebPoly([0, 1]), None, K) == pytest.approx(0.75, rel=1e-12)
    assert cb.l1_norm_weighted(ChebPoly([1.0]), None, validate([(-1, -0.5), (0.1, 0.2)])) == pytest.approx(0.6)


def test_monomial_conversion_examples():
    assert np.allclose(cb.monomial_to_cheb([0, 0, 0, 1]).coeffs, [0, 0.75, 0, 0.25])
    assert np.allclose(cb.cheb_to_monomial(ChebPoly.basis_poly(2)), [-1, 0, 2])


def test_weight_validation():
    w = RationalWeight.from_monomial([1, 0, 1], [2, 0, -1])
    assert w(0.5) == pytest.approx(1.25 / 1.75)
    w.validate_on(validate([(-1, 1)]))
    with pytest.raises(WeightInvalid):
        RationalWeight.from_monomial([1], [0.5, 0, -1]).validate_on(validate([(-1, 1)]))


def test_quadrature_exact_for_polynomials():
    val = cb.integrate_adaptive(lambda x: x**10, -1, 1)
    assert val == pytest.approx(2 / 11, rel=1e-14)


@given(coeff_arrays, coeff_arrays, st.integers(0, 2**31))
def test_multiply_pointwise(p, q, seed):
    P, Q = ChebPoly(p), ChebPoly(q)
    x = np.random.default_rng(seed).uniform(-1, 1, 20)
    lhs = cb.evaluate(cb.multiply(P, Q), x)
    rhs = cb.evaluate(P, x) * cb.evaluate(Q, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.sum(np.abs(p)) * np.sum(np.abs(q)))


@given(coeff_arrays)
def test_t_u_round_trip(p):
    back = cb.u_to_t(cb.t_to_u(ChebPoly(p)))
    assert np.allclose(back.padded(len(p)), ChebPoly(p).padded(len(p)), atol=1e-12, rtol=0)


@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-2, 2)))
def test_l1_below_twice_sup(p):
    P = ChebPoly(nonzero(p))
    K = validate([(-1, 1)])
    assert cb.l1_norm_weighted(P, None, K) <= 2 * cb.sup_norm_weighted(P, None, (-1, 1))[0] * (1 + 1e-10)


@given(coeff_arrays, st.integers(0, 6))
def test_mult_matrix_consistency(w, N):
    Om = ChebPoly(nonzero(w))
    p = np.random.default_rng(N).normal(size=N + 1)
    lhs = cb.mult_matrix(Om, N) @ p
    rhs = cb.multiply(Om, ChebPoly(p)).padded(len(lhs))
    assert np.allclose(lhs, rhs, atol=1e-14, rtol=1e-14)


@given(st.lists(st.floats(-0.95, 0.95), min_size=1, max_size=3),
       st.lists(st.floats(-0.95, 0.95), min_size=1, max_size=3))
def test_roots_of_product(rp, rq):
    # multiple roots are ill-conditioned at any precision; keep them apart
    assume(len(rp + rq) < 2 or np.diff(np.sort(rp + rq)).min() > 0.05)
    def from_roots(r):
        return ChebPoly(np.polynomial.chebyshev.chebfromroots(r))
    prod = cb.multiply(from_roots(rp), from_roots(rq))
    got = np.sort(cb.roots(prod, imag_tol=1e-5).real)
    want = np.sort(np.concatenate([cb.roots(from_roots(rp), imag_tol=1e-5).real,
                                   cb.roots(from_roots(rq), imag_tol=1e-5).real]))
    assert np.allclose(got, want, atol=1e-7)


@given(arrays(np.float64, 11, elements=st.floats(-3, 3)))
def test_monomial_round_trip(m):
    back = cb.monomial_to_cheb(cb.cheb_to_monomial(cb.monomial_to_cheb(m)))
    ref = cb.monomial_to_cheb(m)
    assert np.allclose(back.padded(11), ref.padded(11), atol=1e-12)
