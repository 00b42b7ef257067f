import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sprecov.exceptions import DomainError
from sprecov.numerics import RandomStream, symmetric_eigenvalues, uniform_grid
from sprecov.signal_model import (ReducedProblem, SignalModel, SpectrumSummary, autocorrelation,
                                  kernel_zeros, power_spectrum_dtft, power_spectrum_paper,
                                  sample_sparse_vector, sigma_min_bound, spectrum_discrepancy,
                                  time_average_autocorrelation, toeplitz_autocorrelation)


def test_reduced_problem_dimensions():
    rp = ReducedProblem(10, 3, 2)
    assert rp.p_prime == 9
    assert rp.q == pytest.approx(2 / 9)
    assert rp.with_n(4).n == 4


@pytest.mark.parametrize("args", [(5, 6, 1), (5, 2, 3), (5, 2, 0), (0, 0, 0), (5.5, 2, 1)])
def test_reduced_problem_domain(args):
    with pytest.raises(DomainError):
        ReducedProblem(*args)


@pytest.mark.parametrize("lam,xi", [(-1.0, 0.0), (1.0, -0.1), (1.0, 1.5), (math.nan, 0.0)])
def test_signal_model_domain(lam, xi):
    with pytest.raises(DomainError):
        SignalModel(lam, xi)


def test_signal_model_properties():
    sm = SignalModel.from_lambda_sq(4.0, xi=0.25)
    assert sm.lam == 2.0
    assert sm.sign_correlation == pytest.approx(4 * 0.25**2 - 4 * 0.25 + 1)
    assert sm.snr(3) == pytest.approx(12.0)


def test_autocorrelation_closed_values():
    rp = ReducedProblem(8, 2, 2)
    sm = SignalModel(1.0)
    assert autocorrelation(rp, sm, 0) == pytest.approx(0.25)
    assert autocorrelation(rp, sm, 4) == pytest.approx(4 / 8 * 0.0625)
    assert autocorrelation(rp, sm, -4) == autocorrelation(rp, sm, 4)
    assert autocorrelation(rp, sm, 8) == 0.0
    # symmetric signs cancel every cross term
    assert np.all(autocorrelation(rp, SignalModel(1.0, 0.5), np.arange(1, 8)) == 0.0)


@pytest.mark.parametrize("xi", [0.0, 0.3])
def test_autocorrelation_matches_bernoulli_time_average(xi):
    rp = ReducedProblem(8, 2, 2)
    sm = SignalModel(1.5, xi)
    draws = 20000
    B = np.array([sample_sparse_vector(rp, sm, RandomStream(17, t), support="bernoulli").values
                  for t in range(draws)])
    est = time_average_autocorrelation(B)
    mean = est.mean(axis=0)
    se = est.std(axis=0, ddof=1) / math.sqrt(draws)
    expected = autocorrelation(rp, sm, np.arange(8))
    assert np.all(np.abs(mean - expected) <= 4 * se + 1e-12)


def test_toeplitz_structure_and_cap():
    rp = ReducedProblem(6, 3, 3)
    R = toeplitz_autocorrelation(rp, SignalModel(1.0))
    assert R.shape == (6, 6)
    assert np.array_equal(R, R.T)
    assert all(np.allclose(np.diag(R, d), R[0, d]) for d in range(6))
    with pytest.raises(DomainError):
        toeplitz_autocorrelation(ReducedProblem(600, 10, 10), SignalModel(1.0))


def _fejer_spectrum(rp, sm, w):
    # independent form: (q - q^2 c) lam^2 + q^2 c lam^2 |sum_j e^{i j w}|^2 / p'
    pp, q, c = rp.p_prime, rp.q, sm.sign_correlation
    dirichlet = np.abs(np.exp(1j * np.outer(w, np.arange(pp))).sum(axis=1)) ** 2 / pp
    return (q - q * q * c) * sm.lambda_sq + q * q * c * sm.lambda_sq * dirichlet


@pytest.mark.parametrize("pp,m,xi", [(4, 1, 0.0), (8, 3, 0.25), (16, 8, 0.0), (9, 9, 0.1)])
def test_dtft_matches_fejer_form(pp, m, xi):
    rp = ReducedProblem(pp, m, m)
    sm = SignalModel(1.3, xi)
    spec = power_spectrum_dtft(rp, sm, uniform_grid(256))
    np.testing.assert_allclose(spec.values, _fejer_spectrum(rp, sm, spec.omega), atol=1e-12)


@given(st.integers(2, 40), st.data(), st.floats(0.0, 1.0), st.floats(0.1, 10.0))
@settings(max_examples=60, deadline=None)
def test_spectrum_invariants(pp, data, xi, lam):
    m = data.draw(st.integers(1, pp))
    rp = ReducedProblem(pp, m, m)
    sm = SignalModel(lam, xi)
    spec = power_spectrum_dtft(rp, sm, uniform_grid(512))
    bound = sigma_min_bound(rp, sm)
    assert spec.G_inf == pytest.approx(bound, abs=1e-9 * lam * lam)
    assert np.all(spec.values >= bound - 1e-9 * lam * lam)
    if spec.G_log is not None:
        assert spec.G_inf <= math.exp(spec.G_log) * (1 + 1e-12) + 1e-15
        assert math.exp(spec.G_log) <= spec.values.max() * (1 + 1e-12)
    worst = sigma_min_bound(rp, sm, worst_case=True)
    assert worst <= bound + 1e-15


@pytest.mark.parametrize("pp,m", [(4, 1), (8, 2), (12, 5)])
def test_toeplitz_eigenvalues_above_spectrum_infimum(pp, m):
    rp = ReducedProblem(pp, m, m)
    sm = SignalModel(1.0)
    lam_min = symmetric_eigenvalues(toeplitz_autocorrelation(rp, sm))[0]
    assert lam_min >= power_spectrum_dtft(rp, sm).G_inf - 1e-12


def test_kernel_zeros():
    z = kernel_zeros(ReducedProblem(4, 2, 2))
    np.testing.assert_allclose(z, [np.pi / 2, np.pi, 3 * np.pi / 2])


def test_closed_form_discrepancy_example():
    rp = ReducedProblem(8, 2, 2)
    d = spectrum_discrepancy(rp, SignalModel(1.0), np.pi)
    assert d["dtft"][0] == pytest.approx(0.1875, abs=1e-12)
    assert d["paper"][0] == pytest.approx(0.25, abs=1e-12)
    assert d["normalized_discrepancy"][0] == pytest.approx(0.0625 / 0.6875, rel=1e-9)


def test_closed_form_singular_limit():
    rp = ReducedProblem(5, 2, 2)
    sm = SignalModel(1.0)
    at_zero = power_spectrum_paper(rp, sm, 0.0)
    near = power_spectrum_paper(rp, sm, 1e-7)
    assert at_zero == pytest.approx(near, rel=1e-6)


def test_spectrum_csv_round_trip(tmp_path):
    spec = power_spectrum_dtft(ReducedProblem(8, 3, 3), SignalModel(1.7, 0.2), uniform_grid(64))
    path = tmp_path / "s.csv"
    spec.to_csv(path)
    text = path.read_bytes()
    assert text.startswith(b"omega,S\n") and b"\r" not in text
    back = SpectrumSummary.from_csv(path)
    assert np.array_equal(back.omega, spec.omega)
    assert np.array_equal(back.values, spec.values)
    assert back.G_log == spec.G_log


def test_spectrum_csv_rejects_bad_input(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("w,value\n0,1\n")
    with pytest.raises(DomainError):
        SpectrumSummary.from_csv(path)
    path.write_text("omega,S\n0,1\n0.5,1\n")
    with pytest.raises(DomainError):
        SpectrumSummary.from_csv(path)


def test_log_average_none_when_nonpositive():
    w = uniform_grid(32)
    spec = SpectrumSummary.from_values(w, np.where(w < 1, 0.0, 1.0))
    assert spec.G_log is None and spec.geometric_mean is None


@pytest.mark.parametrize("xi", [0.0, 0.5, 1.0])
def test_sample_sparse_vector(xi):
    rp = ReducedProblem(12, 3, 3)
    sm = SignalModel(2.0, xi)
    negatives = 0
    for t in range(400):
        v = sample_sparse_vector(rp, sm, RandomStream(3, t))
        assert v.size == 12
        assert np.array_equal(np.flatnonzero(v.values), v.support)
        assert v.support.size == 3
        assert np.all(np.abs(v.values[v.support]) == 2.0)
        negatives += int(np.sum(v.values < 0))
    frac = negatives / 1200
    assert abs(frac - xi) <= 4 * math.sqrt(max(xi * (1 - xi), 1e-12) / 1200) + 1e-12


def test_sample_sparse_vector_unknown_model():
    with pytest.raises(DomainError):
        sample_sparse_vector(ReducedProblem(5, 2, 2), SignalModel(1.0), RandomStream(0), "poisson")
