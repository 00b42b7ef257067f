"""Closed-form recovery conditions and minimal-measurement solvers.

All arithmetic is in natural logs. The Fano additive constant (``slack``)
defaults to 1; pass ``math.log(2)`` for the stricter form.
"""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .exceptions import DomainError
from .numerics import integrate_periodic, log_binomial_array, spd_log_det, symmetric_eigenvalues
from .signal_model import (ReducedProblem, SignalModel, SpectrumSummary, power_spectrum_dtft,
                           sigma_min_bound)
from .utils import check_count, check_real, check_symmetric

DEFAULT_SLACK = 1.0
THEOREMS = ("thm1", "cor1", "wang_necessary", "thm3", "cor2")

OK = "ok"
UNSATISFIABLE = "unsatisfiable-in-domain"
INFINITE = "infinite"


@dataclass
class BoundResult:
    """Outcome of a minimal-``n`` computation for one theorem.

    ``per_m`` rows hold ``m`` and either ``lhs``/``rhs`` (``thm1``/``thm3`` forms,
    evaluated at ``n_min`` or at the last scanned ``n``) or ``f`` (the
    ``cor1``/``wang`` ratio forms).
    """

    theorem: str
    p: int
    k: int
    n_min: int | None
    status: str
    per_m: list
    slack_constant: float = DEFAULT_SLACK
    lambda_sq: float | None = None
    G: float | list | None = None
    extra: dict = field(default_factory=dict)

    @property
    def satisfiable(self):
        return self.n_min is not None

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)

    def csv_rows(self):
        """One row per ``m``: theorem, p, k, lambda_sq, n_min, m, f (or lhs, rhs)."""
        n_min = self.n_min if self.n_min is not None else self.status
        for row in self.per_m:
            yield {
                "theorem": self.theorem, "p": self.p, "k": self.k,
                "lambda_sq": "" if self.lambda_sq is None else repr(float(self.lambda_sq)),
                "n_min": n_min, "m": row["m"],
                "f": _fmt(row.get("f")), "lhs": _fmt(row.get("lhs")), "rhs": _fmt(row.get("rhs")),
            }

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.csv_rows())
        return out.getvalue() if fh is None else None


CSV_FIELDS = ["theorem", "p", "k", "lambda_sq", "n_min", "m", "f", "lhs", "rhs"]


def _fmt(value):
    return "" if value is None else repr(float(value))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# ---------------------------------------------------------------- Fano side

def log_count_minus_one(log_count):
    """``ln(C - 1)`` from ``ln C``; ``-inf`` when ``C = 1``."""
    log_count = np.asarray(log_count, dtype=float)
    with np.errstate(divide="ignore"):
        out = log_count + np.log(-np.expm1(-log_count))
    return np.where(log_count <= 0.0, -np.inf, out)


def fano_lhs(p_prime, m, slack=DEFAULT_SLACK):
    """``ln[C(p', m) - 1] - slack``; ``-inf`` when ``C(p', m) = 1``."""
    return log_count_minus_one(log_binomial_array(p_prime, m)) - slack


def _per_m(p, k):
    m = np.arange(1, k + 1)
    return m, p - k + m


def _vacuous(p_prime, m):
    """``C(p', m) <= 2``: constraint is trivially met and skipped."""
    return log_binomial_array(p_prime, m) <= math.log(2.0) + 1e-12


# ------------------------------------------- sufficient conditions (thm1, thm3)

def _theorem_rhs(p_prime, n, G):
    """``(n/2) ln[1 + G (Gamma(n) C(p'-1, n-1))^{1/n}]``, vectorized over ``p_prime`` and ``G``.

    Entries with ``n > p' - 1`` come back as NaN (outside the rank domain).
    """
    p_prime = np.asarray(p_prime, dtype=float)
    G = np.broadcast_to(np.asarray(G, dtype=float), p_prime.shape)
    in_domain = (n >= 1) & (n <= p_prime - 1)
    safe_pp = np.where(in_domain, p_prime, n + 1.0)
    a = special.gammaln(n) + log_binomial_array(safe_pp - 1.0, n - 1.0)
    with np.errstate(divide="ignore"):
        log_g = np.log(G)
    L = 0.5 * n * np.logaddexp(0.0, log_g + a / n)
    return np.where(in_domain, L, np.nan)


def _check_n_domain(rp):
    if rp.n is None:
        raise DomainError("this bound needs the measurement count n")
    if not 1 <= rp.n <= rp.p_prime - 1:
        raise DomainError(f"n = {rp.n} outside the domain [1, p' - 1] = [1, {rp.p_prime - 1}]")


def thm3_rhs(rp, G):
    """Right-hand side ``L`` with spectral level ``G >= 0``."""
    _check_n_domain(rp)
    G = check_real(G, "G", minimum=0.0)
    return float(_theorem_rhs(rp.p_prime, rp.n, G))


def thm1_G(rp, sm):
    """``q (1 - q) lam^2``, the unipolar minimum-eigenvalue bound."""
    return sigma_min_bound(rp, sm, worst_case=True)


def thm1_rhs(rp, sm):
    """Right-hand side ``L`` of the strictly sparse sufficient condition."""
    return thm3_rhs(rp, thm1_G(rp, sm))


def _per_m_G(p, k, sm=None, G=None):
    m, pp = _per_m(p, k)
    if sm is not None:
        q = m / pp
        return m, pp, np.maximum(q - q * q, 0.0) * sm.lambda_sq
    if callable(G):
        values = np.array([float(G(int(mi))) for mi in m])
    else:
        values = np.asarray(G, dtype=float)
        values = np.full(k, float(values)) if values.ndim == 0 else values
    if values.shape != (k,):
        raise DomainError(f"G must be a scalar or have one entry per m = 1..{k}")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise DomainError("G must be finite and nonnegative")
    return m, pp, values


def _holds_at(n, m, pp, G, lhs, vacuous):
    rhs = _theorem_rhs(pp, n, G)
    ok = vacuous | (~np.isnan(rhs) & (lhs <= rhs))
    return bool(np.all(ok)), rhs, ok


def _theorem_rows(m, pp, lhs, rhs, ok, vacuous):
    rows = []
    for i in range(m.size):
        rows.append({
            "m": int(m[i]), "p_prime": int(pp[i]), "lhs": float(lhs[i]),
            "rhs": None if np.isnan(rhs[i]) else float(rhs[i]),
            "holds": bool(ok[i]), "vacuous": bool(vacuous[i]),
        })
    return rows


def theorem_holds(p, k, n, sm=None, G=None, slack=DEFAULT_SLACK):
    """Check ``ln[C(p', m) - 1] - slack <= L`` for every ``m = 1..k``.

    ``m`` with ``C(p', m) <= 2`` are skipped. A non-vacuous ``m`` whose
    ``n`` lies outside ``[1, p' - 1]`` counts as not satisfied.
    """
    p = check_count(p, "p", minimum=1)
    k = check_count(k, "k", minimum=1)
    n = check_count(n, "n", minimum=1)
    m, pp, Gm = _per_m_G(p, k, sm, G)
    lhs = fano_lhs(pp, m, slack)
    vacuous = _vacuous(pp, m)
    holds, rhs, ok = _holds_at(n, m, pp, Gm, lhs, vacuous)
    return holds, _theorem_rows(m, pp, lhs, rhs, ok, vacuous)


def thm1_holds(p, k, n, sm, slack=DEFAULT_SLACK):
    return theorem_holds(p, k, n, sm=sm, slack=slack)


def thm3_holds(p, k, n, G, slack=DEFAULT_SLACK):
    return theorem_holds(p, k, n, G=G, slack=slack)


def _theorem_min_n(theorem, p, k, sm=None, G=None, slack=DEFAULT_SLACK):
    p = check_count(p, "p", minimum=1)
    k = check_count(k, "k", minimum=1)
    if k > p:
        raise DomainError(f"need k <= p, got k={k}, p={p}")
    m, pp, Gm = _per_m_G(p, k, sm, G)
    lhs = fano_lhs(pp, m, slack)
    vacuous = _vacuous(pp, m)
    n_max = max(p - 1, 1)
    last = None
    for n in range(1, n_max + 1):
        holds, rhs, ok = _holds_at(n, m, pp, Gm, lhs, vacuous)
        last = (n, rhs, ok)
        if holds:
            return BoundResult(theorem, p, k, n, OK, _theorem_rows(m, pp, lhs, rhs, ok, vacuous),
                               slack, lambda_sq=None if sm is None else sm.lambda_sq,
                               G=_g_report(Gm))
    n, rhs, ok = last
    return BoundResult(theorem, p, k, None, UNSATISFIABLE,
                       _theorem_rows(m, pp, lhs, rhs, ok, vacuous), slack,
                       lambda_sq=None if sm is None else sm.lambda_sq, G=_g_report(Gm),
                       extra={"last_scanned_n": n})


def _g_report(Gm):
    return float(Gm[0]) if np.all(Gm == Gm[0]) else [float(g) for g in Gm]


def thm1_min_n(p, k, sm, slack=DEFAULT_SLACK):
    """Smallest ``n`` (ascending scan over ``1..p-1``) meeting the ``thm1`` condition."""
    return _theorem_min_n("thm1", p, k, sm=sm, slack=slack)


def thm3_min_n(p, k, G, slack=DEFAULT_SLACK):
    """Spectral-level analogue of :func:`thm1_min_n`.

    ``G`` may be one value for every ``m``, a length-``k`` sequence, or a
    callable ``m -> G``.
    """
    return _theorem_min_n("thm3", p, k, G=G, slack=slack)


# ------------------------------------------------- ratio forms (cor1, wang)

def _ratio(numerator, denominator):
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = numerator / denominator
    f = np.where(denominator > 0, f, np.where(numerator > 0, np.inf, -np.inf))
    return np.where(np.isneginf(numerator), -np.inf, f)


def cor1_f_array(p, k, sm, slack=DEFAULT_SLACK):
    m, pp = _per_m(p, k)
    numerator = fano_lhs(pp, m, slack)
    denominator = 0.5 * np.log1p(m / math.e * sm.lambda_sq * (1.0 - m / pp))
    return m, _ratio(numerator, denominator)


def wang_f_array(p, k, sm, slack=DEFAULT_SLACK):
    m, pp = _per_m(p, k)
    numerator = log_binomial_array(pp, m) - slack
    denominator = 0.5 * np.log1p(m * sm.lambda_sq * (1.0 - m / pp))
    return m, _ratio(numerator, denominator)


def cor1_f(rp, sm, slack=DEFAULT_SLACK):
    """``f_m = (ln[C(p', m) - 1] - slack) / (1/2 ln(1 + (m/e) lam^2 (1 - m/p')))``."""
    numerator = fano_lhs(rp.p_prime, rp.m, slack)
    denominator = 0.5 * math.log1p(rp.m / math.e * sm.lambda_sq * (1.0 - rp.q))
    return float(_ratio(numerator, denominator))


def wang_f(rp, sm, slack=DEFAULT_SLACK):
    """``f_m = (ln C(p', m) - slack) / (1/2 ln(1 + m lam^2 (1 - m/p')))``."""
    numerator = log_binomial_array(rp.p_prime, rp.m) - slack
    denominator = 0.5 * math.log1p(rp.m * sm.lambda_sq * (1.0 - rp.q))
    return float(_ratio(numerator, denominator))


def _ratio_min_n(theorem, p, k, m, f, sm, slack):
    worst = float(np.max(f)) if f.size else -np.inf
    rows = [{"m": int(mi), "f": float(fi)} for mi, fi in zip(m, f)]
    threshold = max(worst, float(k))
    if not math.isfinite(threshold):
        return BoundResult(theorem, p, k, None, INFINITE, rows, slack, lambda_sq=sm.lambda_sq)
    return BoundResult(theorem, p, k, math.floor(threshold) + 1, OK, rows, slack,
                       lambda_sq=sm.lambda_sq, extra={"max_f": worst})


def cor1_min_n(p, k, sm, slack=DEFAULT_SLACK):
    """``n_min = floor(max{f_1, ..., f_k, k}) + 1`` with the ``cor1`` ratios."""
    p = check_count(p, "p", minimum=1)
    k = check_count(k, "k", minimum=1)
    m, f = cor1_f_array(p, k, sm, slack)
    return _ratio_min_n("cor1", p, k, m, f, sm, slack)


def wang_min_n(p, k, sm, slack=DEFAULT_SLACK):
    """Necessary-condition counterpart of :func:`cor1_min_n`."""
    p = check_count(p, "p", minimum=1)
    k = check_count(k, "k", minimum=1)
    m, f = wang_f_array(p, k, sm, slack)
    return _ratio_min_n("wang_necessary", p, k, m, f, sm, slack)


# ---------------------------------------------------------- spectral forms

def cor2_G(spectrum):
    """Log-average ``(1/2pi) int ln S(w) dw`` of a tabulated spectrum."""
    values = np.asarray(spectrum.values, dtype=float)
    if np.any(values <= 0.0):
        raise DomainError("log-average undefined: spectrum has values <= 0")
    return integrate_periodic(np.log(values), spectrum.omega)


def cor2_min_n(p, k, spectrum, slack=DEFAULT_SLACK, substitution="geometric"):
    """Minimal ``n`` with the log-average spectrum in place of the infimum.

    ``substitution="geometric"`` feeds ``exp(G_log)`` (the geometric-mean
    spectral level) into the ``thm3`` form; ``"literal"`` feeds ``G_log``
    itself and requires it to be nonnegative.
    """
    g_log = cor2_G(spectrum)
    if substitution == "geometric":
        level = math.exp(g_log)
    elif substitution == "literal":
        if g_log < 0:
            raise DomainError(f"literal substitution needs G >= 0, got {g_log}")
        level = g_log
    else:
        raise DomainError(f"unknown substitution {substitution!r}")
    result = _theorem_min_n("cor2", p, k, G=level, slack=slack)
    result.extra.update({"G_log": g_log, "G_level": level, "substitution": substitution,
                         "G_inf": spectrum.G_inf})
    return result


def ewss_spectrum_levels(p, k, sm, omega_grid=None):
    """Per-``m`` spectrum infimum of the strict EWSS model (one entry per m = 1..k)."""
    return np.array([
        power_spectrum_dtft(ReducedProblem(p, k, m), sm, omega_grid).G_inf for m in range(1, k + 1)
    ])


def merikoski_b_bound(R, n, snr=None):
    """Lower bound on the sum of the ``n`` smallest log-eigenvalues of ``R``.

    ``(d - n) ln((d - n)/snr) + ln det R`` with ``d = dim R``; ``snr``
    defaults to ``trace(R)``, for which the bound is guaranteed. Returns the
    bound together with the exact value and the signed slack (exact - bound).
    """
    R = check_symmetric(R, "R")
    d = R.shape[0]
    n = check_count(n, "n", minimum=1)
    if n >= d:
        raise DomainError(f"need n < dim(R) = {d}, got n={n}")
    snr = float(np.trace(R)) if snr is None else check_real(snr, "snr", minimum=0.0, strict=True)
    log_det = spd_log_det(R)
    bound = (d - n) * math.log((d - n) / snr) + log_det
    eig = symmetric_eigenvalues(R)
    exact = math.fsum(np.log(eig[:n]))
    return {"bound": bound, "exact": exact, "slack": exact - bound, "violated": exact < bound,
            "snr": snr, "log_det": log_det}


# --------------------------------------------------------- scaling regimes

@dataclass(frozen=True)
class Regime:
    row: int
    description: str
    sparsity: str
    growth: str

    def k_of(self, p):
        if self.sparsity == "linear":
            return max(1, p // 4)
        return max(1, int(round(math.sqrt(p))))

    def lambda_sq_of(self, p):
        k = self.k_of(p)
        if self.row in (1, 4):
            return 1.0 / k
        if self.row in (2, 5):
            return math.log(k) / k
        return 1.0

    def g(self, p):
        k = self.k_of(p)
        if self.row == 1:
            return p * math.log(p)
        if self.row in (2, 3):
            return float(p)
        if self.row == 4:
            return k * math.log(p - k)
        if self.row == 5:
            return max(k * math.log(p - k) / math.log(k), k * math.log(p / k) / math.log(math.log(k)))
        return max(k * math.log(p / k) / math.log(k), float(k))


REGIMES = {
    1: Regime(1, "k = p/4, lambda^2 = 1/k, n ~ p log p", "linear", "p ln p"),
    2: Regime(2, "k = p/4, lambda^2 = log k / k, n ~ p", "linear", "p"),
    3: Regime(3, "k = p/4, lambda^2 = 1, n ~ p", "linear", "p"),
    4: Regime(4, "k = sqrt(p), lambda^2 = 1/k, n ~ k log(p - k)", "sublinear", "k ln(p - k)"),
    5: Regime(5, "k = sqrt(p), lambda^2 = log k / k, n ~ max{k log(p-k)/log k, k log(p/k)/log log k}",
              "sublinear", "max{k ln(p-k)/ln k, k ln(p/k)/ln ln k}"),
    6: Regime(6, "k = sqrt(p), lambda^2 = 1, n ~ max{k log(p/k)/log k, k}", "sublinear",
              "max{k ln(p/k)/ln k, k}"),
}


def regime_scaling_check(row, p_sequence, tolerance=0.10, window=3, slack=DEFAULT_SLACK):
    """``cor1`` ``n_min`` against a regime growth law over a ``p`` sequence.

    Returns a dict with per-``p`` rows (``n_min``, ``g``, ratio, successive
    ratio) and ``spread`` = max/min - 1 of the ratio over the last ``window``
    points; ``stable`` is None when fewer than ``window`` points exist.
    """
    if row not in REGIMES:
        raise DomainError(f"unknown regime row {row}; choose 1..6")
    regime = REGIMES[row]
    rows = []
    prev = None
    for p in p_sequence:
        p = check_count(p, "p", minimum=4)
        k = regime.k_of(p)
        lam_sq = regime.lambda_sq_of(p)
        res = cor1_min_n(p, k, SignalModel.from_lambda_sq(lam_sq), slack)
        g = regime.g(p)
        ratio = res.n_min / g if res.n_min is not None else math.inf
        rows.append({"p": p, "k": k, "lambda_sq": lam_sq, "n_min": res.n_min, "g": g, "ratio": ratio,
                     "successive": None if prev is None else ratio / prev})
        prev = ratio
    spread = None
    stable = None
    if len(rows) >= window:
        tail = [r["ratio"] for r in rows[-window:]]
        spread = max(tail) / min(tail) - 1.0
        stable = spread <= tolerance
    return {"row": row, "regime": regime.description, "growth": regime.growth, "rows": rows,
            "spread": spread, "stable": stable, "tolerance": tolerance, "window": window}


__all__ = [
    "BoundResult", "REGIMES", "SpectrumSummary", "cor1_f", "cor1_min_n", "cor2_G", "cor2_min_n",
    "ewss_spectrum_levels", "fano_lhs", "merikoski_b_bound", "regime_scaling_check", "theorem_holds",
    "thm1_G", "thm1_holds", "thm1_min_n", "thm1_rhs", "thm3_holds", "thm3_min_n", "thm3_rhs",
    "wang_f", "wang_min_n",
]
