"""Numerical invariant suites behind ``sprecov validate``.

Each suite returns a list of :class:`PropertyCheck`. Checks with
``asserted=False`` are informational and never fail a run.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .numerics import RandomStream, symmetric_eigenvalues
from .signal_model import (ReducedProblem, SignalModel, power_spectrum_dtft, sigma_min_bound,
                           toeplitz_autocorrelation)
from .wishart_info import (convention_gap, exact_mutual_information, jensen_minkowski_bound,
                           mc_mutual_information, mc_wishart_logdet,
                           wishart_logdet_digamma_oracle, wishart_logdet_paper_binomial,
                           wishart_logdet_paper_harmonic)

SUITES = ("wishart", "spectrum", "mi-bound", "identity")
WISHART_CONFIGS = ((8, 4), (16, 4), (16, 8), (32, 8))
SPECTRUM_DIMS = (4, 8, 16, 32)
SPECTRUM_XI = (0.0, 0.25, 0.5)


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    asserted: bool = True
    measured: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.asserted = bool(self.asserted)

    def line(self):
        tag = "PASS" if self.passed else ("FAIL" if self.asserted else "NOTE")
        detail = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.name}: {detail}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def all_passed(checks):
    return all(c.passed for c in checks if c.asserted)


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def checks_to_json(checks):
    return json.dumps([asdict(c) for c in checks], sort_keys=True, default=_plain)


def wishart_suite(trials=20000, seed=7, configs=WISHART_CONFIGS):
    """Monte Carlo ``E ln det(X X^T)`` against the digamma oracle and the harmonic form."""
    checks = []
    for pp, n in configs:
        est = mc_wishart_logdet(pp, n, trials, seed)
        oracle = wishart_logdet_digamma_oracle(pp, n)
        harmonic = wishart_logdet_paper_harmonic(pp, n)
        binomial = wishart_logdet_paper_binomial(pp, n)
        gap = harmonic - est.mean
        expected_gap = convention_gap(pp, n)
        base = {"p_prime": pp, "n": n, "mc_mean": est.mean, "mc_se": est.std_error}
        checks.append(PropertyCheck(
            f"wishart digamma-oracle agreement (p'={pp}, n={n})",
            abs(est.mean - oracle) <= 3.0 * est.std_error,
            measured={**base, "digamma_oracle": oracle, "z": (est.mean - oracle) / est.std_error}))
        checks.append(PropertyCheck(
            f"harmonic-form gap equals convention difference (p'={pp}, n={n})",
            abs(gap - expected_gap) <= 3.0 * est.std_error,
            measured={**base, "paper_harmonic": harmonic, "gap": gap,
                      "convention_gap": expected_gap}))
        checks.append(PropertyCheck(
            f"binomial-form gap (p'={pp}, n={n})", True, asserted=False,
            measured={**base, "paper_binomial": binomial, "gap": binomial - est.mean}))
    return checks


def spectrum_suite(dims=SPECTRUM_DIMS, xis=SPECTRUM_XI, lam=1.0, tol=1e-9, inf_tol=1e-6):
    """Toeplitz minimum eigenvalue against the spectrum infimum on the full (p', m, xi) grid."""
    worst_margin = math.inf
    worst_inf_err = 0.0
    failures = []
    count = 0
    for pp in dims:
        for m in range(1, pp + 1):
            for xi in xis:
                rp = ReducedProblem(pp, m, m)
                sm = SignalModel(lam, xi)
                lam_min = symmetric_eigenvalues(toeplitz_autocorrelation(rp, sm))[0]
                spec = power_spectrum_dtft(rp, sm)
                margin = lam_min - spec.refinement["grid_min"]
                inf_err = abs(spec.G_inf - sigma_min_bound(rp, sm))
                worst_margin = min(worst_margin, margin)
                worst_inf_err = max(worst_inf_err, inf_err)
                count += 1
                if margin < -tol or inf_err > inf_tol:
                    failures.append((pp, m, xi))
    checks = [
        PropertyCheck("toeplitz min eigenvalue >= spectrum grid infimum",
                      worst_margin >= -tol,
                      measured={"cases": count, "worst_margin": worst_margin, "tolerance": tol}),
        PropertyCheck("spectrum infimum equals sigma_min(xi) at kernel zeros",
                      worst_inf_err <= inf_tol,
                      measured={"cases": count, "max_abs_error": worst_inf_err,
                                "tolerance": inf_tol, "failing": len(failures)}),
    ]
    grid = np.linspace(0.0, 1.0, 101)
    rp = ReducedProblem(16, 4, 4)
    unipolar = sigma_min_bound(rp, SignalModel(lam, 0.0))
    lowest = min(sigma_min_bound(rp, SignalModel(lam, xi)) for xi in grid)
    checks.append(PropertyCheck("unipolar sign pattern is the worst case", lowest >= unipolar - 1e-15,
                                measured={"unipolar": unipolar, "min_over_xi_grid": lowest}))
    return checks


def mi_bound_configs():
    """Twenty (p', m, n, lambda^2) settings with n <= p'/2 and p' <= 32."""
    dims = (8, 12, 16, 24, 32)
    lams = (1.0, 4.0, 10.0)
    out = []
    for i in range(20):
        pp = dims[i % 5]
        n = pp // 2 if i % 2 else max(1, pp // 4)
        m = 1 + (i * 3) % (pp // 2)
        out.append((pp, m, n, lams[i % 3]))
    return out


def mi_bound_suite(trials=1000, seed=11, configs=None):
    """Monte Carlo mean of the exact MI against the Jensen/Minkowski lower bound."""
    checks = []
    for pp, m, n, lam_sq in (configs or mi_bound_configs()):
        rp = ReducedProblem(pp, m, m)
        R = toeplitz_autocorrelation(rp, SignalModel.from_lambda_sq(lam_sq))
        lam_min = symmetric_eigenvalues(R)[0]
        a = wishart_logdet_digamma_oracle(pp, n)
        b = n * math.log(lam_min) if lam_min > 0 else -math.inf
        bound = jensen_minkowski_bound(a, b, n, "digamma_oracle")
        est = mc_mutual_information(R, n, trials, seed)
        checks.append(PropertyCheck(
            f"E[MI] >= Jensen/Minkowski bound (p'={pp}, m={m}, n={n}, lambda^2={lam_sq:g})",
            est.mean >= bound.L - 3.0 * est.std_error,
            measured={"mc_mean": est.mean, "mc_se": est.std_error, "L": bound.L,
                      "margin_se": (est.mean - bound.L) / est.std_error}))
    return checks


def identity_suite(instances=50, seed=5, max_dim=32, rtol=1e-8):
    """``ln det(I_n + X R X^T) = ln det(I_p' + X^T X R)`` on random instances."""
    worst = 0.0
    for i in range(instances):
        stream = RandomStream(seed, i)
        pp = 2 + int(stream.uniform() * (max_dim - 1))
        n = 1 + int(stream.uniform() * pp)
        X = stream.standard_normal((n, pp))
        B = stream.standard_normal((pp, pp))
        R = B @ B.T / pp
        lhs = exact_mutual_information(X, R, check_identity=False)
        sign, logdet = np.linalg.slogdet(np.eye(pp) + X.T @ X @ R)
        rhs = 0.5 * logdet
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return [PropertyCheck("determinant identity n-form vs p'-form", worst <= rtol,
                          measured={"instances": instances, "max_relative_error": worst,
                                    "tolerance": rtol})]


def run_suite(name, trials, seed):
    if name == "wishart":
        return wishart_suite(trials=trials, seed=seed)
    if name == "spectrum":
        return spectrum_suite()
    if name == "mi-bound":
        return mi_bound_suite(trials=trials, seed=seed)
    if name == "identity":
        return identity_suite(seed=seed)
    if name == "all":
        out = []
        for suite in SUITES:
            out.extend(run_suite(suite, trials, seed))
        return out
    raise ValueError(f"unknown suite {name!r}")
