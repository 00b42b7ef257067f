import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sprecov.exceptions import DomainError, NotPositiveDefiniteError
from sprecov.numerics import (EULER_GAMMA, RandomStream, check_uniform_grid, cholesky_lower,
                              digamma, integrate_periodic, least_squares, log_binomial,
                              log_binomial_array, log_gamma, spd_log_det, symmetric_eigenvalues,
                              uniform_grid)

mpmath.mp.dps = 40



# ---------------------------------------------------------------- special functions

@pytest.mark.parametrize("x", [1e-8, 0.1, 0.5, 1.0, 1.5, 2.0, 7.25, 33.0, 1e3, 1e6, 1e12])
def test_log_gamma_matches_mpmath(x):
    expected = float(mpmath.loggamma(mpmath.mpf(x)))
    assert abs(log_gamma(x) - expected) <= 1e-14 * max(1.0, abs(expected))


@pytest.mark.parametrize("x", [1e-6, 0.3, 1.0, 2.5, 10.0, 123.4, 1e5, 1e9])
def test_digamma_matches_mpmath(x):
    expected = float(mpmath.digamma(mpmath.mpf(x)))
    assert abs(digamma(x) - expected) <= 1e-13 * max(1.0, abs(expected))


def test_special_values():
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-15)
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-15)
    assert digamma(2.5) == pytest.approx(0.7031566406452432, abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, math.nan, math.inf])
def test_special_functions_reject_nonpositive(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)
    with pytest.raises(DomainError):
        digamma(bad)


def test_special_functions_vectorize():
    x = np.array([0.5, 1.0, 4.0])
    np.testing.assert_allclose(log_gamma(x), [math.lgamma(v) for v in x], rtol=1e-14)
    assert digamma(x).shape == (3,)


@pytest.mark.parametrize("a,b", [(0, 0), (5, 0), (5, 5), (10, 3), (64, 32), (300, 120),
                                 (1000, 500), (10**6, 10), (10**5, 4 * 10**4)])
def test_log_binomial_matches_big_integer(a, b):
    expected = float(mpmath.log(mpmath.mpf(math.comb(a, b))))
    assert abs(log_binomial(a, b) - expected) <= 1e-12 * max(1.0, expected)


def test_log_binomial_large_central():
    a, b = 10**6, 5 * 10**5
    mp = mpmath.mpf
    expected = float(mpmath.loggamma(mp(a + 1)) - mpmath.loggamma(mp(b + 1)) - mpmath.loggamma(mp(a - b + 1)))
    assert abs(log_binomial(a, b) - expected) <= 1e-12 * expected


def test_log_binomial_example():
    assert log_binomial(10**6, 10) == pytest.approx(123.05064800642472, rel=1e-13)


@given(st.integers(0, 5000), st.data())
@settings(max_examples=150, deadline=None)
def test_log_binomial_symmetry(a, data):
    b = data.draw(st.integers(0, a))
    assert log_binomial(a, b) == log_binomial(a, a - b)


def test_log_binomial_array_agrees():
    a = np.array([10, 50, 400, 4000])
    b = np.array([3, 25, 17, 1999])
    scalar = [log_binomial(int(x), int(y)) for x, y in zip(a, b)]
    np.testing.assert_allclose(log_binomial_array(a, b), scalar, rtol=1e-12)


@pytest.mark.parametrize("a,b", [(3, 4), (-1, 0)])
def test_log_binomial_domain(a, b):
    with pytest.raises(DomainError):
        log_binomial(a, b)


# ---------------------------------------------------------------- dense linear algebra

def _random_symmetric(seed, d):
    B = RandomStream(seed, d).standard_normal((d, d))
    return (B + B.T) / 2


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
def test_eigenvalues_match_mpmath(d):
    M = _random_symmetric(3, d)
    expected = sorted(float(v) for v in mpmath.eigsy(mpmath.matrix(M.tolist()))[0])
    np.testing.assert_allclose(symmetric_eigenvalues(M), expected, atol=1e-12)


def test_eigenvalues_characteristic_polynomial_oracle():
    M = np.array([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]])
    # det(M - tI) = -t^3 + 9t^2 - 24t + 18 for this tridiagonal matrix
    roots = sorted(float(mpmath.re(r)) for r in mpmath.polyroots([1, -9, 24, -18]))
    np.testing.assert_allclose(symmetric_eigenvalues(M), roots, atol=1e-13)


@given(st.integers(2, 24), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_eigenvalue_invariants(d, seed):
    M = _random_symmetric(seed, d)
    ev = symmetric_eigenvalues(M)
    assert np.all(np.diff(ev) >= 0)
    assert math.isclose(ev.sum(), np.trace(M), abs_tol=1e-10 * max(1.0, np.abs(M).sum()))
    assert math.isclose((ev ** 2).sum(), (M ** 2).sum(), rel_tol=1e-10)


def test_eigenvalues_reject_asymmetric():
    with pytest.raises(DomainError):
        symmetric_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_cholesky_reconstructs():
    B = RandomStream(1, 0).standard_normal((6, 6))
    M = B @ B.T + 0.1 * np.eye(6)
    L = cholesky_lower(M)
    assert np.allclose(np.triu(L, 1), 0.0)
    np.testing.assert_allclose(L @ L.T, M, atol=1e-12)


def test_spd_log_det_matrix_determinant_lemma():
    # det(I + u u^T) = 1 + |u|^2
    u = np.array([1.0, 1.0, 1.0])
    assert spd_log_det(np.eye(3) + np.outer(u, u)) == pytest.approx(math.log(4.0), abs=1e-14)


def test_spd_log_det_matches_mpmath():
    B = RandomStream(2, 0).standard_normal((7, 7))
    M = B @ B.T + np.eye(7)
    expected = float(mpmath.log(mpmath.det(mpmath.matrix(M.tolist()))))
    assert spd_log_det(M) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("M", [np.array([[1.0, 2.0], [2.0, 1.0]]), np.zeros((2, 2)),
                               np.array([[1.0, 1.0], [1.0, 1.0]])])
def test_not_positive_definite(M):
    with pytest.raises(NotPositiveDefiniteError):
        spd_log_det(M)


@pytest.mark.parametrize("shape", [(8, 3), (5, 5), (3, 1), (20, 7)])
def test_least_squares_full_rank(shape):
    s = RandomStream(4, shape[0] * 100 + shape[1])
    A = s.standard_normal(shape)
    y = s.standard_normal(shape[0])
    coef, resid = least_squares(A, y)
    ref, *_ = np.linalg.lstsq(A, y, rcond=None)
    np.testing.assert_allclose(coef, ref, atol=1e-11)
    r = y - A @ ref
    assert resid == pytest.approx(r @ r, abs=1e-11)


def test_least_squares_rank_deficient_min_norm():
    s = RandomStream(5, 0)
    A = s.standard_normal((6, 2))
    A = np.column_stack([A, A[:, 0] + A[:, 1]])
    y = s.standard_normal(6)
    coef, resid = least_squares(A, y)
    ref, *_ = np.linalg.lstsq(A, y, rcond=None)
    np.testing.assert_allclose(coef, ref, atol=1e-10)
    assert resid == pytest.approx(np.sum((y - A @ ref) ** 2), abs=1e-10)


def test_least_squares_wide_interpolates():
    s = RandomStream(6, 0)
    A = s.standard_normal((2, 4))
    y = s.standard_normal(2)
    coef, resid = least_squares(A, y)
    assert resid == pytest.approx(0.0, abs=1e-20)
    np.testing.assert_allclose(coef, np.linalg.pinv(A) @ y, atol=1e-12)


def test_least_squares_zero_matrix():
    coef, resid = least_squares(np.zeros((3, 2)), np.array([1.0, 2.0, 2.0]))
    assert np.all(coef == 0.0)
    assert resid == pytest.approx(9.0)


def test_least_squares_shape_errors():
    with pytest.raises(DomainError):
        least_squares(np.ones((3, 2)), np.ones(4))


# ---------------------------------------------------------------- periodic integration

def test_periodic_integration_exact_for_trig_polynomials():
    w = uniform_grid(64)
    f = 2.0 + np.cos(w) + 0.5 * np.sin(3 * w) + np.cos(31 * w)
    assert integrate_periodic(f, w) == pytest.approx(2.0, abs=1e-14)


def test_periodic_integration_grid_checks():
    with pytest.raises(DomainError):
        integrate_periodic(np.ones(8))
    with pytest.raises(DomainError):
        check_uniform_grid(np.linspace(0, 2 * np.pi, 32))


# ---------------------------------------------------------------- random streams

def test_stream_reproducible_and_independent_of_order():
    a1 = RandomStream(9, 3).standard_normal(5)
    RandomStream(9, 2).standard_normal(100)
    a2 = RandomStream(9, 3).standard_normal(5)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, RandomStream(9, 4).standard_normal(5))
    assert not np.array_equal(a1, RandomStream(10, 3).standard_normal(5))


def test_stream_gaussian_moments():
    z = RandomStream(0, 0).standard_normal(200_000)
    assert abs(z.mean()) < 5 / math.sqrt(z.size)
    assert abs(z.var() - 1.0) < 5 * math.sqrt(2 / z.size)


def test_stream_subset_and_scalar():
    s = RandomStream(1, 1)
    sub = s.subset(10, 4)
    assert len(set(sub.tolist())) == 4 and np.all(np.diff(sub) > 0) and sub.max() < 10
    assert isinstance(s.standard_normal(), float)
    assert s.standard_normal((2, 3)).shape == (2, 3)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_stream_seed_range(seed):
    with pytest.raises(DomainError):
        RandomStream(seed)
