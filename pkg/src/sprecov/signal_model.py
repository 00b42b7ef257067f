"""Ergodic wide-sense-stationary sparse source: sampling, autocorrelation,
Toeplitz autocorrelation matrix, power spectrum and eigenvalue bounds."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .exceptions import DomainError
from .numerics import TWO_PI, check_uniform_grid, integrate_periodic, uniform_grid
from .utils import MAX_DENSE_DIM, check_count, check_real

DEFAULT_GRID_SIZE = 4096


@dataclass(frozen=True)
class ReducedProblem:
    """Dimensions of the reduced decoding game.

    ``k - m`` of the ``k`` nonzero locations are revealed, leaving the decoder
    to choose among ``C(p', m)`` supports with ``p' = p - k + m``.
    """

    p: int
    k: int
    m: int
    n: int | None = None

    def __post_init__(self):
        p = check_count(self.p, "p", minimum=1)
        k = check_count(self.k, "k", minimum=1)
        m = check_count(self.m, "m", minimum=1)
        if not m <= k <= p:
            raise DomainError(f"need 1 <= m <= k <= p, got p={p}, k={k}, m={m}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)
        if self.n is not None:
            object.__setattr__(self, "n", check_count(self.n, "n", minimum=1))

    @property
    def p_prime(self):
        return self.p - self.k + self.m

    @property
    def q(self):
        return self.m / self.p_prime

    def with_n(self, n):
        return ReducedProblem(self.p, self.k, self.m, n)


@dataclass(frozen=True)
class SignalModel:
    """Worst-case sparse source: every nonzero is ``+lam`` or ``-lam``,
    negative with probability ``xi``."""

    lam: float
    xi: float = 0.0

    def __post_init__(self):
        lam = check_real(self.lam, "lambda", minimum=0.0)
        xi = check_real(self.xi, "xi", minimum=0.0)
        if xi > 1.0:
            raise DomainError(f"xi must lie in [0, 1], got {xi}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def from_lambda_sq(cls, lambda_sq, xi=0.0):
        return cls(math.sqrt(check_real(lambda_sq, "lambda_sq", minimum=0.0)), xi)

    @property
    def lambda_sq(self):
        return self.lam * self.lam

    @property
    def sign_correlation(self):
        """E[s_i s_j] for independent signs: ``4 xi^2 - 4 xi + 1``."""
        return (1.0 - 2.0 * self.xi) ** 2

    def snr(self, k):
        return k * self.lambda_sq


@dataclass(frozen=True)
class SparseVector:
    values: np.ndarray
    support: np.ndarray

    @property
    def size(self):
        return self.values.shape[0]


@dataclass
class SpectrumSummary:
    """Tabulated power spectrum on a uniform grid over [0, 2*pi).

    Attributes
    ----------
    omega : ndarray
    values : ndarray
        ``S(omega)``.
    G_inf : float
        Infimum of the spectrum (grid minimum, possibly refined).
    G_log : float or None
        Log-average ``(1/2pi) int ln S``; None when some ``S <= 0``.
    """

    omega: np.ndarray
    values: np.ndarray
    G_inf: float
    G_log: float | None = None
    refinement: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, omega, values, G_inf=None):
        omega = check_uniform_grid(omega)
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != omega.shape:
            raise DomainError("omega and values must have equal length")
        inf = float(np.min(values)) if G_inf is None else float(G_inf)
        g_log = None
        if np.all(values > 0.0) and values.size >= 16:
            g_log = integrate_periodic(np.log(values), omega)
        return cls(omega, values, inf, g_log)

    @property
    def geometric_mean(self):
        return None if self.G_log is None else math.exp(self.G_log)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["omega", "S"])
            for w, s in zip(self.omega, self.values):
                writer.writerow([repr(float(w)), repr(float(s))])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["omega", "S"]:
                raise DomainError(f"{path}: expected header 'omega,S', got {header}")
            rows = [(float(a), float(b)) for a, b in reader]
        if not rows:
            raise DomainError(f"{path}: no spectrum rows")
        data = np.array(rows)
        return cls.from_values(data[:, 0], data[:, 1])


def autocorrelation(rp, sm, tau):
    """Time-average autocorrelation of the reduced sparse vector at lag ``tau``.

    ``r(0) = q lam^2``; for ``0 < |tau| < p'`` the triangular window
    ``(p' - |tau|)/p'`` times ``q^2 lam^2 (1 - 2 xi)^2``; zero beyond.
    Accepts an integer or an integer array.
    """
    lag = np.abs(np.asarray(tau, dtype=np.int64))
    pp = rp.p_prime
    q = rp.q
    cross = q * q * sm.lambda_sq * sm.sign_correlation
    r = np.where(lag < pp, (pp - lag) / pp * cross, 0.0)
    r = np.where(lag == 0, q * sm.lambda_sq, r)
    return float(r) if r.ndim == 0 else r


def autocorrelation_sequence(rp, sm):
    """``r(0), ..., r(p' - 1)``."""
    return autocorrelation(rp, sm, np.arange(rp.p_prime))


def toeplitz_autocorrelation(rp, sm):
    """Symmetric Toeplitz autocorrelation matrix of size ``p' x p'``."""
    if rp.p_prime > MAX_DENSE_DIM:
        raise DomainError(f"p' = {rp.p_prime} exceeds the dense cap {MAX_DENSE_DIM}")
    return toeplitz(autocorrelation_sequence(rp, sm))


def spectrum_from_autocorrelation(r, omega):
    """Exact finite Fourier sum ``r0 + 2 sum_{tau>=1} r(tau) cos(omega tau)``."""
    r = np.asarray(r, dtype=float)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    taus = np.arange(1, r.size)
    if taus.size == 0:
        return np.full(omega.shape, r[0])
    return r[0] + 2.0 * np.cos(np.outer(omega, taus)) @ r[1:]


def kernel_zeros(rp):
    """Frequencies ``2 pi j / p'`` (j = 1..p'-1) where the Fejer kernel vanishes."""
    pp = rp.p_prime
    return TWO_PI * np.arange(1, pp) / pp


def power_spectrum_dtft(rp, sm, omega_grid=None):
    """Power spectrum as the exact Fourier sum of the autocorrelation.

    The infimum is refined by evaluating the sum at the kernel zeros
    ``2 pi j / p'`` in addition to the grid.
    """
    omega = uniform_grid(DEFAULT_GRID_SIZE) if omega_grid is None else check_uniform_grid(omega_grid)
    r = autocorrelation_sequence(rp, sm)
    values = spectrum_from_autocorrelation(r, omega)
    zeros = kernel_zeros(rp)
    at_zeros = spectrum_from_autocorrelation(r, zeros) if zeros.size else np.array([])
    grid_min = float(np.min(values))
    g_inf = min(grid_min, float(np.min(at_zeros))) if at_zeros.size else grid_min
    summary = SpectrumSummary.from_values(omega, values, G_inf=g_inf)
    summary.refinement = {"grid_min": grid_min, "omega_zeros": zeros, "S_zeros": at_zeros}
    return summary


def power_spectrum_paper(rp, sm, omega, order=None):
    """Closed-form spectrum with the unnormalized squared Dirichlet kernel.

    ``[sin(w (N + 1/2)) / sin(w/2)]^2 (q lam)^2 c + q lam^2 - (q lam)^2 c``
    with ``c = (1 - 2 xi)^2`` and kernel order ``N`` (default ``p'``). At
    ``sin(w/2) = 0`` the kernel takes its limit ``(2N + 1)^2``. Kept for
    comparison with :func:`power_spectrum_dtft`; it is not used in bounds.
    """
    N = rp.p_prime if order is None else check_count(order, "order")
    w = np.asarray(omega, dtype=float)
    half = np.sin(0.5 * w)
    singular = np.abs(half) < 1e-14
    safe = np.where(singular, 1.0, half)
    kernel = np.where(singular, (2.0 * N + 1.0) ** 2, (np.sin(w * (N + 0.5)) / safe) ** 2)
    q = rp.q
    cross = (q * sm.lam) ** 2 * sm.sign_correlation
    out = kernel * cross + q * sm.lambda_sq - cross
    return float(out) if out.ndim == 0 else out


def spectrum_discrepancy(rp, sm, omega, order=None):
    """Compare the closed form with the exact Fourier sum at ``omega``.

    Returns a dict with both values and their discrepancy normalized by the
    largest magnitude of the exact spectrum on a default grid.
    """
    exact = spectrum_from_autocorrelation(autocorrelation_sequence(rp, sm), np.atleast_1d(omega))
    closed = np.atleast_1d(power_spectrum_paper(rp, sm, omega, order=order))
    scale = float(np.max(np.abs(power_spectrum_dtft(rp, sm).values)))
    return {
        "omega": np.atleast_1d(np.asarray(omega, dtype=float)),
        "dtft": exact,
        "paper": closed,
        "normalized_discrepancy": np.abs(closed - exact) / scale if scale > 0 else np.abs(closed - exact),
    }


def sigma_min_bound(rp, sm, worst_case=False):
    """Lower bound ``[q - q^2 (1 - 2 xi)^2] lam^2`` on the Toeplitz eigenvalues.

    ``worst_case=True`` evaluates the unipolar case ``xi in {0, 1}``, i.e.
    ``(1 - q) q lam^2``.
    """
    q = rp.q
    c = 1.0 if worst_case else sm.sign_correlation
    return max((q - q * q * c) * sm.lambda_sq, 0.0)


def sample_sparse_vector(rp, sm, stream, support="fixed"):
    """Draw one sparse vector of length ``p'``.

    ``support="fixed"`` draws a uniformly random ``m``-subset. ``"bernoulli"``
    marks each index independently with probability ``q``; that is the
    per-index model whose time-average autocorrelation is
    :func:`autocorrelation`. Each nonzero is ``-lam`` with probability ``xi``.
    """
    pp = rp.p_prime
    if support == "fixed":
        idx = stream.subset(pp, rp.m)
    elif support == "bernoulli":
        idx = np.flatnonzero(stream.bernoulli(rp.q, pp))
    else:
        raise DomainError(f"unknown support model {support!r}")
    negative = stream.uniform(idx.size) < sm.xi
    values = np.zeros(pp)
    values[idx] = np.where(negative, -sm.lam, sm.lam)
    return SparseVector(values, idx)


def time_average_autocorrelation(values, max_lag=None):
    """Per-realization estimate ``(1/p') sum_i b_i b_{i+tau}`` for each row.

    Parameters
    ----------
    values : array of shape (draws, p')
    max_lag : int, optional
        Largest lag returned (default ``p' - 1``).

    Returns
    -------
    ndarray of shape (draws, max_lag + 1)
    """
    B = np.atleast_2d(np.asarray(values, dtype=float))
    pp = B.shape[1]
    max_lag = pp - 1 if max_lag is None else min(int(max_lag), pp - 1)
    out = np.empty((B.shape[0], max_lag + 1))
    for tau in range(max_lag + 1):
        out[:, tau] = np.einsum("ij,ij->i", B[:, : pp - tau], B[:, tau:]) / pp
    return out
