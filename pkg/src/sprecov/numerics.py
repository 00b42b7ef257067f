"""Numerical kernel: special functions, small dense symmetric linear algebra,
periodic quadrature and a counter-based seeded random stream.

Everything here works in natural logarithms.
"""

import math

import numpy as np
from scipy import special

from .exceptions import DomainError, NotPositiveDefiniteError
from .utils import MAX_DENSE_DIM, check_count, check_square, check_symmetric

EULER_GAMMA = float(np.euler_gamma)
LOG_TWO = math.log(2.0)
TWO_PI = 2.0 * math.pi

# below this many factors ln C(a, b) is summed directly instead of via lgamma
_DIRECT_BINOMIAL_TERMS = 256
_UINT64_MAX = 2**64 - 1


def _check_positive_arg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} requires x > 0, got {x!r}")
    return arr


def log_gamma(x):
    """Natural log of the Gamma function for ``x > 0`` (scalar or array)."""
    arr = _check_positive_arg(x, "log_gamma")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def digamma(x):
    """Digamma function psi(x) for ``x > 0`` (scalar or array)."""
    arr = _check_positive_arg(x, "digamma")
    out = special.digamma(arr)
    return float(out) if out.ndim == 0 else out


def log_binomial(a, b):
    """Natural log of the binomial coefficient C(a, b).

    Symmetric by construction: both ``(a, b)`` and ``(a, a - b)`` reduce to the
    smaller of the two lower indices before evaluation.
    """
    a = check_count(a, "a")
    b = check_count(b, "b")
    if b > a:
        raise DomainError(f"log_binomial requires b <= a, got a={a}, b={b}")
    b = min(b, a - b)
    if b == 0:
        return 0.0
    if b <= _DIRECT_BINOMIAL_TERMS:
        return math.fsum(math.log(a - b + i) - math.log(i) for i in range(1, b + 1))
    return float(special.gammaln(a + 1.0) - special.gammaln(b + 1.0)
                 - special.gammaln(a - b + 1.0))


def log_binomial_array(a, b):
    """Vectorized ln C(a, b) for integer arrays with ``0 <= b <= a``.

    Used on hot paths (per-m scans); accuracy is that of ``gammaln`` rather
    than the direct sum used by :func:`log_binomial`.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0) or np.any(b > a):
        raise DomainError("log_binomial_array requires 0 <= b <= a")
    return special.gammaln(a + 1.0) - special.gammaln(b + 1.0) - special.gammaln(a - b + 1.0)


def symmetric_eigenvalues(M, tol=1e-12, max_sweeps=60):
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotation.

    Parameters
    ----------
    M : array-like of shape (d, d)
        Symmetric to relative tolerance 1e-10, ``d <= 512``.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``tol * ||M||_F``.

    Returns
    -------
    ndarray of shape (d,)
        Eigenvalues in ascending order.
    """
    A = check_symmetric(M).copy()
    d = A.shape[0]
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(d)
    threshold = tol * scale
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))
        if off <= threshold:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(A))


def cholesky_lower(M, pivot_rtol=1e-12):
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix.

    Raises :class:`NotPositiveDefiniteError` when a squared pivot falls to
    ``pivot_rtol * ||M||`` or below.
    """
    return _cholesky(check_square(M), pivot_rtol)


def _cholesky(A, pivot_rtol):
    d = A.shape[0]
    floor = pivot_rtol * max(np.linalg.norm(A), np.finfo(float).tiny)
    L = np.zeros_like(A)
    for j in range(d):
        row = L[j, :j]
        pivot = A[j, j] - row @ row
        if not pivot > floor:
            raise NotPositiveDefiniteError(
                f"pivot {pivot:.3e} at column {j} is below {floor:.3e}; matrix is not positive definite")
        L[j, j] = math.sqrt(pivot)
        if j + 1 < d:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ row) / L[j, j]
    return L


def spd_log_det(M, pivot_rtol=1e-12):
    """ln det M for symmetric positive-definite ``M`` via Cholesky."""
    L = _cholesky(check_symmetric(M), pivot_rtol)
    return 2.0 * math.fsum(np.log(np.diag(L)))


def _pivoted_householder(A):
    """Householder QR with column pivoting; returns (reflectors, R, permutation)."""
    R = A.copy()
    rows, cols = R.shape
    perm = list(range(cols))
    reflectors = []
    norms = (R * R).sum(axis=0)
    for j in range(min(rows, cols)):
        piv = j + int(norms[j:].argmax())
        if piv != j:
            R[:, [j, piv]] = R[:, [piv, j]]
            norms[[j, piv]] = norms[[piv, j]]
            perm[j], perm[piv] = perm[piv], perm[j]
        x = R[j:, j]
        xnorm = math.sqrt(float(x @ x))
        if xnorm == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += math.copysign(xnorm, x[0])
        v /= math.sqrt(float(v @ v))
        block = R[j:, j:]
        block -= 2.0 * v[:, None] * (v @ block)
        R[j + 1:, j] = 0.0
        reflectors.append(v)
        # exact downdate of the trailing column norms
        norms[j + 1:] = (R[j + 1:, j + 1:] ** 2).sum(axis=0) if j + 1 < rows else 0.0
    return reflectors, R, np.array(perm)


def _apply_qt(reflectors, y):
    y = y.copy()
    for j, v in enumerate(reflectors):
        if v is not None:
            seg = y[j:]
            seg -= 2.0 * float(v @ seg) * v
    return y


def least_squares(A, y, rank_rtol=1e-10):
    """Solve ``min ||y - A nu||^2`` by pivoted Householder QR.

    Rank-deficient ``A`` (diagonal of R below ``rank_rtol`` relative to its
    largest entry) yields the minimum-norm minimizer, obtained from a second
    QR factorization of the leading rows of R.

    Returns
    -------
    coefficients : ndarray of shape (k,)
    residual_sq : float
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or y.ndim != 1:
        raise DomainError("least_squares expects a 2-D A and a 1-D y")
    rows, cols = A.shape
    if rows < 1 or cols < 1:
        raise DomainError(f"least_squares needs n >= 1 and k >= 1, got shape {A.shape}")
    if y.shape[0] != rows:
        raise DomainError(f"dimension mismatch: A has {rows} rows, y has {y.shape[0]}")
    reflectors, R, perm = _pivoted_householder(A)
    qty = _apply_qt(reflectors, y)
    diag = np.abs(np.diag(R))
    rank = 0
    if diag.size and diag[0] > 0.0:
        rank = int(np.sum(diag > rank_rtol * diag[0]))
    residual_sq = float(qty[rank:] @ qty[rank:])
    z = np.zeros(cols)
    if rank == cols:
        z = _back_substitute(R[:cols, :cols], qty[:cols])
    elif rank > 0:
        # minimum-norm solution of R_top z = c through QR of R_top^T
        top = R[:rank, :]
        q_t, t_upper = np.linalg.qr(top.T)
        w = _forward_substitute(t_upper.T, qty[:rank])
        z = q_t @ w
    coef = np.empty(cols)
    coef[perm] = z
    return coef, residual_sq


def _back_substitute(U, b):
    n = U.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - U[i, i + 1:] @ x[i + 1:]) / U[i, i]
    return x


def _forward_substitute(L, b):
    n = L.shape[0]
    x = np.zeros(n)
    for i in range(n):
        x[i] = (b[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def uniform_grid(size):
    """``size`` equally spaced frequencies covering [0, 2*pi)."""
    size = check_count(size, "grid size", minimum=1)
    return TWO_PI * np.arange(size) / size


def integrate_periodic(values, omega=None):
    """Normalized integral (1/2pi) * int_0^{2pi} f(w) dw of tabulated periodic data.

    The trapezoidal rule on a full-period uniform grid reduces to the mean of
    the samples; it is exact for trigonometric polynomials of degree below
    half the grid size.
    """
    f = np.asarray(values, dtype=float).ravel()
    if f.size < 16:
        raise DomainError(f"integrate_periodic needs at least 16 grid points, got {f.size}")
    if omega is not None:
        check_uniform_grid(omega, f.size)
    return math.fsum(f) / f.size


def check_uniform_grid(omega, size=None, rtol=1e-9):
    """Reject grids that are not ``2*pi*j/N`` up to ``rtol``."""
    w = np.asarray(omega, dtype=float).ravel()
    if size is not None and w.size != size:
        raise DomainError(f"grid has {w.size} points, values have {size}")
    if w.size < 2:
        raise DomainError("grid needs at least two points")
    expected = uniform_grid(w.size)
    if np.max(np.abs(w - expected)) > rtol * TWO_PI:
        raise DomainError("omega grid is not uniform on [0, 2*pi)")
    return w


class RandomStream:
    """Reproducible random stream keyed by ``(master_seed, stream_id)``.

    Backed by the Philox counter-based generator with the two 64-bit words as
    its key, so a stream's draws never depend on how many other streams exist
    or in which order they are consumed. Gaussian variates come from the
    Box-Muller pair transform applied to the stream's uniforms.
    """

    def __init__(self, master_seed, stream_id=0):
        self.master_seed = _check_u64(master_seed, "master_seed")
        self.stream_id = _check_u64(stream_id, "stream_id")
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RandomStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def standard_normal(self, size=None):
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        pairs = (count + 1) // 2
        u = self._gen.random((2, pairs))
        radius = np.sqrt(-2.0 * np.log1p(-u[0]))
        angle = TWO_PI * u[1]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        z = z[:count]
        return float(z[0]) if not shape else z.reshape(shape)

    def normal(self, scale=1.0, size=None):
        return scale * self.standard_normal(size)

    def subset(self, population, size):
        """Uniformly random ``size``-subset of ``range(population)``, sorted."""
        return np.sort(self._gen.choice(population, size=size, replace=False))

    def bernoulli(self, prob, size=None):
        return self._gen.random(size) < prob


def _check_u64(value, name):
    value = check_count(value, name)
    if value > _UINT64_MAX:
        raise DomainError(f"{name} must fit in 64 unsigned bits, got {value}")
    return value


__all__ = [
    "EULER_GAMMA", "LOG_TWO", "MAX_DENSE_DIM", "RandomStream", "cholesky_lower",
    "check_uniform_grid", "digamma", "integrate_periodic", "least_squares", "log_binomial",
    "log_binomial_array", "log_gamma", "spd_log_det", "symmetric_eigenvalues", "uniform_grid",
]
