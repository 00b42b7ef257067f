"""Input validation helpers shared by the estimators and functional API."""

import numbers

import numpy as np
from .exceptions import DomainError

MAX_DENSE_DIM = 512


def check_count(value, name, minimum=0):
    """Return ``value`` as an int, rejecting non-integers and values below ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_real(value, name, minimum=None, strict=False):
    value = float(value)
    if not np.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    if minimum is not None:
        if (strict and value <= minimum) or (not strict and value < minimum):
            op = ">" if strict else ">="
            raise DomainError(f"{name} must be {op} {minimum}, got {value}")
    return value


def check_square(M, name="M", max_dim=MAX_DENSE_DIM):
    """Validate a finite 2-D square float array no larger than ``max_dim``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise DomainError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} contains non-finite entries")
    if M.shape[0] > max_dim:
        raise DomainError(f"{name} has dimension {M.shape[0]}, cap is {max_dim}")
    return M


def check_symmetric(M, name="M", rtol=1e-10, max_dim=MAX_DENSE_DIM):
    """Validate a square matrix that is symmetric to relative tolerance ``rtol``.

    Returns the exactly symmetrized copy ``(M + M.T) / 2``.
    """
    M = check_square(M, name, max_dim=max_dim)
    scale = np.max(np.abs(M))
    if np.max(np.abs(M - M.T)) > rtol * max(scale, np.finfo(float).tiny):
        raise DomainError(f"{name} is not symmetric within relative tolerance {rtol}")
    return 0.5 * (M + M.T)
