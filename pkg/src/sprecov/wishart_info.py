"""Wishart log-determinant expectations and mutual-information bounds.

Three expressions for ``a = E ln det(X X^T)`` coexist here:

* ``paper_harmonic`` -- the harmonic-sum form, equal to ``sum_j psi(p' - j + 1)``
  (the complex-Wishart convention),
* ``paper_binomial`` -- ``ln C(p'-1, n-1) + ln Gamma(n)``, with the companion
  ``exact_product = sum_j ln(p' - j)``,
* ``digamma_oracle`` -- ``sum_j [psi((p' - j + 1)/2) + ln 2]``, the exact value
  for an ``n x p'`` real standard Gaussian ``X``.
"""

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, NotPositiveDefiniteError
from .numerics import (EULER_GAMMA, LOG_TWO, RandomStream, digamma, log_binomial, log_gamma,
                       spd_log_det)
from .signal_model import sigma_min_bound
from .utils import check_count

VARIANTS = ("paper_harmonic", "paper_binomial", "exact_product", "digamma_oracle")


@dataclass(frozen=True)
class InfoRateBound:
    """Lower bound ``L = (n/2) ln(1 + exp((a + b)/n))`` on the expected information rate."""

    a: float
    b: float
    n: int
    L: float
    variant: str

    def to_dict(self):
        return asdict(self)


class MonteCarloEstimate(NamedTuple):
    mean: float
    std_error: float
    trials: int


def _check_pn(p_prime, n, allow_full=False):
    p_prime = check_count(p_prime, "p_prime", minimum=1)
    n = check_count(n, "n", minimum=1)
    upper = p_prime if allow_full else p_prime - 1
    if n > upper:
        raise DomainError(f"need 1 <= n <= {upper} for p'={p_prime}, got n={n}")
    return p_prime, n


def wishart_logdet_paper_harmonic(p_prime, n):
    """``-n*gamma + sum_{j=1}^{n} sum_{l=1}^{p'-j} 1/l``."""
    p_prime, n = _check_pn(p_prime, n)
    inv = 1.0 / np.arange(1, p_prime, dtype=float)
    terms = [-n * EULER_GAMMA]
    for j in range(1, n + 1):
        terms.extend(inv[: p_prime - j])
    return math.fsum(terms)


def wishart_logdet_paper_binomial(p_prime, n):
    """``ln C(p'-1, n-1) + ln Gamma(n)``."""
    p_prime, n = _check_pn(p_prime, n)
    return log_binomial(p_prime - 1, n - 1) + log_gamma(n)


def wishart_logdet_exact_product(p_prime, n):
    """``sum_{j=1}^{n} ln(p' - j)``; exceeds the binomial form by ``ln(p' - n)``."""
    p_prime, n = _check_pn(p_prime, n)
    return math.fsum(math.log(p_prime - j) for j in range(1, n + 1))


def wishart_logdet_digamma_oracle(p_prime, n):
    """Exact ``E ln det(X X^T)`` for ``X`` an ``n x p'`` real standard Gaussian."""
    p_prime, n = _check_pn(p_prime, n, allow_full=True)
    d = p_prime - np.arange(1, n + 1) + 1
    return math.fsum(digamma(0.5 * d) + LOG_TWO)


def convention_gap(p_prime, n):
    """``sum_j [psi(d) - psi(d/2) - ln 2]``, d = p' - j + 1: harmonic form minus the real-Wishart value."""
    p_prime, n = _check_pn(p_prime, n)
    d = p_prime - np.arange(1, n + 1) + 1.0
    return math.fsum(digamma(d) - digamma(0.5 * d) - LOG_TWO)


def wishart_logdet(p_prime, n, variant="paper_binomial"):
    funcs = {
        "paper_harmonic": wishart_logdet_paper_harmonic,
        "paper_binomial": wishart_logdet_paper_binomial,
        "exact_product": wishart_logdet_exact_product,
        "digamma_oracle": wishart_logdet_digamma_oracle,
    }
    if variant not in funcs:
        raise DomainError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    return funcs[variant](p_prime, n)


def gaussian_matrix(stream, rows, cols):
    return stream.standard_normal((rows, cols))


def _gram_logdet(X):
    gram = X @ X.T
    try:
        return spd_log_det(gram)
    except NotPositiveDefiniteError:
        return spd_log_det(gram + 1e-12 * np.eye(gram.shape[0]))


def mc_wishart_logdet(p_prime, n, trials, seed):
    """Monte Carlo estimate of ``E ln det(X X^T)``, ``X`` an ``n x p'`` Gaussian.

    Trial ``t`` draws from ``RandomStream(seed, t)``, so the estimate does not
    depend on evaluation order.
    """
    p_prime, n = _check_pn(p_prime, n, allow_full=True)
    trials = check_count(trials, "trials", minimum=100)
    values = np.array([_gram_logdet(gaussian_matrix(RandomStream(seed, t), n, p_prime))
                       for t in range(trials)])
    return MonteCarloEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(trials)),
                              trials)


def exact_mutual_information(X, R, check_identity=True, rtol=1e-8):
    """``(1/2) ln det(I_n + X R X^T)`` for measurement matrix ``X`` (n x p').

    With ``check_identity`` the ``p'``-dimensional form
    ``(1/2) ln det(I_p' + X^T X R)`` is evaluated independently (LU-based) and
    must agree within ``rtol``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    R = np.asarray(R, dtype=float)
    n, pp = X.shape
    if R.shape != (pp, pp):
        raise DomainError(f"R must be {pp}x{pp} to match X of shape {X.shape}, got {R.shape}")
    inner = np.eye(n) + X @ R @ X.T
    value = 0.5 * spd_log_det(0.5 * (inner + inner.T))
    if check_identity:
        sign, logdet = np.linalg.slogdet(np.eye(pp) + X.T @ X @ R)
        other = 0.5 * logdet
        if sign <= 0 or abs(other - value) > rtol * max(1.0, abs(value)):
            raise ArithmeticError(
                f"determinant identity violated: n-form {value!r}, p'-form {other!r}")
    return value


def jensen_minkowski_bound(a, b, n, variant="custom"):
    """``L = (n/2) ln(1 + exp((a + b)/n))``."""
    n = check_count(n, "n", minimum=1)
    a = float(a)
    b = float(b)
    L = 0.5 * n * float(np.logaddexp(0.0, (a + b) / n))
    return InfoRateBound(a, b, n, L, variant)


def information_rate_bound(rp, sm, variant="paper_binomial"):
    """Jensen/Minkowski bound for a reduced problem with unipolar worst-case ``b``.

    ``b = n ln[(1 - q) q lam^2]``; ``a`` from the chosen Wishart variant. With
    ``paper_binomial`` this reproduces :func:`sprecov.bounds.thm1_rhs`.
    """
    if rp.n is None:
        raise DomainError("reduced problem needs n")
    sigma = sigma_min_bound(rp, sm, worst_case=True)
    b = rp.n * math.log(sigma) if sigma > 0 else -math.inf
    a = wishart_logdet(rp.p_prime, rp.n, variant)
    return jensen_minkowski_bound(a, b, rp.n, variant)


def mc_mutual_information(R, n, trials, seed):
    """Monte Carlo mean and standard error of the exact MI over Gaussian ``X``."""
    R = np.asarray(R, dtype=float)
    pp = R.shape[0]
    n = check_count(n, "n", minimum=1)
    trials = check_count(trials, "trials", minimum=2)
    values = np.array([
        exact_mutual_information(gaussian_matrix(RandomStream(seed, t), n, pp), R,
                                 check_identity=False)
        for t in range(trials)
    ])
    return MonteCarloEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(trials)),
                              trials)
