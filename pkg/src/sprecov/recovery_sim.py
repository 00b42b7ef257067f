"""Monte Carlo verification of exact support recovery.

Instances of ``Y = X beta + W`` are decoded with an exhaustive least-squares
search over candidate supports; failure rates are reported with Wilson
intervals.
"""

import csv
import hashlib
import io
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import DomainError, EnumerationCapError
from .numerics import RandomStream, least_squares
from .signal_model import ReducedProblem, SignalModel, sample_sparse_vector
from .utils import check_count, check_real

DEFAULT_CAP = 200_000
WILSON_Z = 1.959963984540054
METRICS = ("exact_support", "top_k")


def n_candidates(pool, m):
    return math.comb(pool, m)


class ExhaustiveSupportDecoder(RegressorMixin, BaseEstimator):
    """Maximum-likelihood support decoder for Gaussian noise.

    Every ``n_nonzero``-subset of the columns outside ``known_support`` is
    tried in lexicographic order; the known columns join each candidate's
    least-squares fit. The subset with the smallest residual wins, ties
    within ``tie_tol`` going to the lexicographically first subset.

    Parameters
    ----------
    n_nonzero : int
        Number of unknown nonzero positions to locate.
    known_support : array-like of int, optional
        Column indices revealed to the decoder.
    max_candidates : int
        Refuse to enumerate more candidate supports than this.
    tie_tol : float
        Absolute residual tolerance for ties.

    Attributes
    ----------
    support_ : ndarray of int
        Sorted decoded support (known plus detected columns).
    detected_ : ndarray of int
        The ``n_nonzero`` detected columns.
    coef_ : ndarray of shape (n_features,)
        Least-squares amplitudes on ``support_``, zero elsewhere.
    residual_ : float
        Squared residual of the winning fit.
    n_candidates_ : int
    """

    def __init__(self, n_nonzero=1, known_support=None, max_candidates=DEFAULT_CAP, tie_tol=1e-12):
        self.n_nonzero = n_nonzero
        self.known_support = known_support
        self.max_candidates = max_candidates
        self.tie_tol = tie_tol

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, ensure_min_samples=1)
        p = X.shape[1]
        known = np.array([] if self.known_support is None else self.known_support, dtype=int)
        known = np.unique(known)
        if known.size and (known.min() < 0 or known.max() >= p):
            raise DomainError("known_support indices out of range")
        pool = np.setdiff1d(np.arange(p), known)
        m = check_count(self.n_nonzero, "n_nonzero", minimum=1)
        if m > pool.size:
            raise DomainError(f"n_nonzero={m} exceeds the {pool.size} candidate columns")
        count = n_candidates(pool.size, m)
        if count > self.max_candidates:
            raise EnumerationCapError(count, self.max_candidates)

        best = None
        for subset in itertools.combinations(pool.tolist(), m):
            cols = np.concatenate([known, subset]) if known.size else np.array(subset)
            coef, resid = least_squares(X[:, cols], y)
            if best is None or resid < best[0] - self.tie_tol:
                best = (resid, np.array(subset), cols, coef)
        resid, detected, cols, coef = best
        self.detected_ = detected
        self.support_ = np.sort(cols)
        self.coef_ = np.zeros(p)
        self.coef_[cols] = coef
        self.residual_ = float(resid)
        self.n_candidates_ = count
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return X @ self.coef_


def exhaustive_ml_decode(X, Y, m, known_support=None, cap=DEFAULT_CAP, tie_tol=1e-12):
    """Functional form of :class:`ExhaustiveSupportDecoder`; returns the sorted support."""
    dec = ExhaustiveSupportDecoder(m, known_support, cap, tie_tol).fit(X, Y)
    return dec.support_


def top_k_support(beta, k):
    """Indices of the ``k`` largest-magnitude entries, ties toward lower index."""
    beta = np.asarray(beta, dtype=float)
    order = np.argsort(-np.abs(beta), kind="stable")
    return np.sort(order[:k])


def top_k_error(decoded_support, beta, k):
    """0-1 indicator for the top-``k`` metric: True when the decoded support
    equals the index set of the ``k`` largest magnitudes of ``beta``."""
    beta = np.asarray(beta, dtype=float)
    k = check_count(k, "k", minimum=1)
    if beta.size < k:
        raise DomainError(f"beta has {beta.size} entries, fewer than k={k}")
    decoded = np.sort(np.asarray(decoded_support, dtype=int))
    return bool(np.array_equal(decoded, top_k_support(beta, k)))


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation setting. ``m = None`` means ``m = k`` (no side information).

    ``tail_scale`` only applies to the ``top_k`` metric: off-support entries
    are uniform on ``(-tail_scale*lam, tail_scale*lam)`` (our own choice of
    approximately sparse test signal).
    """

    p: int
    k: int
    n: int
    lambda_sq: float
    m: int | None = None
    xi: float = 0.0
    noise_std: float = 1.0
    trials: int = 100
    master_seed: int = 0
    error_metric: str = "exact_support"
    cap: int = DEFAULT_CAP
    tail_scale: float = 0.05

    def __post_init__(self):
        m = self.k if self.m is None else self.m
        object.__setattr__(self, "m", m)
        rp = ReducedProblem(self.p, self.k, m)
        check_count(self.n, "n", minimum=1)
        check_count(self.trials, "trials", minimum=1)
        check_real(self.lambda_sq, "lambda_sq", minimum=0.0)
        check_real(self.noise_std, "noise_std", minimum=0.0, strict=True)
        if self.error_metric not in METRICS:
            raise DomainError(f"error_metric must be one of {METRICS}")
        if not 0.0 <= self.tail_scale < 0.1:
            raise DomainError("tail_scale must lie in [0, 0.1)")
        if self.error_metric == "top_k" and m != self.k:
            raise DomainError("top_k metric is defined without side information (m = k)")
        needed = n_candidates(rp.p_prime, m)
        if needed > self.cap:
            raise EnumerationCapError(needed, self.cap)

    @property
    def reduced(self):
        return ReducedProblem(self.p, self.k, self.m)

    @property
    def signal(self):
        return SignalModel.from_lambda_sq(self.lambda_sq, self.xi)

    def to_dict(self):
        return asdict(self)

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Instance:
    X: np.ndarray
    beta: np.ndarray
    support: np.ndarray
    known: np.ndarray
    Y: np.ndarray


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    true_support: tuple
    decoded_support: tuple
    success: bool


def generate_instance(cfg, stream):
    """Draw ``(X, beta, Y)`` for one trial.

    ``X`` is ``n x p`` standard Gaussian, ``beta`` is ``k``-sparse with a
    uniform support and ``+-lam`` entries, ``W ~ N(0, noise_std^2 I)``. A random
    ``k - m`` of the support positions are returned as ``known``.
    """
    sm = cfg.signal
    full = sample_sparse_vector(ReducedProblem(cfg.p, cfg.k, cfg.k), sm, stream)
    beta = full.values.copy()
    if cfg.error_metric == "top_k":
        off = np.setdiff1d(np.arange(cfg.p), full.support)
        beta[off] = sm.lam * cfg.tail_scale * (2.0 * stream.uniform(off.size) - 1.0)
    known_count = cfg.k - cfg.m
    known = np.sort(full.support[np.sort(stream.subset(cfg.k, known_count))]) if known_count else \
        np.array([], dtype=int)
    X = stream.standard_normal((cfg.n, cfg.p))
    W = cfg.noise_std * stream.standard_normal(cfg.n)
    return Instance(X, beta, full.support, known, X @ beta + W)


def run_trial(cfg, trial_index):
    stream = RandomStream(cfg.master_seed, trial_index)
    inst = generate_instance(cfg, stream)
    decoder = ExhaustiveSupportDecoder(cfg.m, inst.known, cfg.cap).fit(inst.X, inst.Y)
    decoded = decoder.support_
    if cfg.error_metric == "top_k":
        success = top_k_error(decoded, inst.beta, cfg.k)
    else:
        success = bool(np.array_equal(decoded, inst.support))
    return TrialOutcome(trial_index, tuple(int(i) for i in inst.support),
                        tuple(int(i) for i in decoded), success)


def wilson_interval(failures, trials, z=WILSON_Z):
    """Wilson score interval for a binomial proportion, clipped to [0, 1]."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    phat = failures / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2.0 * trials)) / denom
    half = z / denom * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    low = min(max(0.0, center - half), phat)
    high = max(min(1.0, center + half), phat)
    return low, high


@dataclass
class SimReport:
    config: dict
    config_hash: str
    master_seed: int
    trials: int
    failures: int
    p_err_hat: float
    ci_low: float
    ci_high: float
    wall_time: float = 0.0
    outcomes: list = field(default_factory=list, repr=False)

    def to_dict(self, timing=True, outcomes=False):
        out = {
            "config": self.config, "config_hash": self.config_hash,
            "master_seed": self.master_seed, "trials": self.trials, "failures": self.failures,
            "p_err_hat": self.p_err_hat, "ci_low": self.ci_low, "ci_high": self.ci_high,
        }
        if timing:
            out["wall_time"] = self.wall_time
        if outcomes:
            out["outcomes"] = [asdict(o) for o in self.outcomes]
        return out

    def to_json(self, timing=True, outcomes=False):
        return json.dumps(self.to_dict(timing, outcomes), sort_keys=True)


def estimate_perr(cfg, n_jobs=1):
    """Failure fraction of the exhaustive decoder over ``cfg.trials`` trials.

    Trial ``t`` uses ``RandomStream(cfg.master_seed, t)``; results are
    reassembled in trial order, so ``n_jobs`` never changes the report.
    """
    start = time.perf_counter()
    if n_jobs == 1:
        outcomes = [run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        outcomes = Parallel(n_jobs=n_jobs)(delayed(run_trial)(cfg, t) for t in range(cfg.trials))
        outcomes = sorted(outcomes, key=lambda o: o.trial_index)
    failures = sum(not o.success for o in outcomes)
    low, high = wilson_interval(failures, cfg.trials)
    return SimReport(cfg.to_dict(), cfg.config_hash(), cfg.master_seed, cfg.trials, failures,
                     failures / cfg.trials, low, high, time.perf_counter() - start, outcomes)


SWEEP_FIELDS = ["n", "trials", "failures", "p_err", "ci_low", "ci_high", "config_hash",
                "master_seed"]


@dataclass
class SweepResult:
    curve: list
    n_star: int | None
    epsilon: float

    def rows(self):
        for n, rep in self.curve:
            yield {"n": n, "trials": rep.trials, "failures": rep.failures,
                   "p_err": repr(rep.p_err_hat), "ci_low": repr(rep.ci_low),
                   "ci_high": repr(rep.ci_high), "config_hash": rep.config_hash,
                   "master_seed": rep.master_seed}

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        writer = csv.DictWriter(out, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return out.getvalue() if fh is None else None


def sweep_n(template, n_range, epsilon, n_jobs=1):
    """Estimate the failure rate for each ``n``; ``n_star`` is the first ``n`` with ``ci_high <= epsilon``."""
    n_values = [int(n) for n in n_range]
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise DomainError("n_range must be strictly ascending")
    epsilon = check_real(epsilon, "epsilon", minimum=0.0)
    curve = []
    n_star = None
    for n in n_values:
        rep = estimate_perr(replace(template, n=n), n_jobs=n_jobs)
        curve.append((n, rep))
        if n_star is None and rep.ci_high <= epsilon:
            n_star = n
    return SweepResult(curve, n_star, epsilon)
