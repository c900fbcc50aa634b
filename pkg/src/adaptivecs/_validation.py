"""Input validation helpers shared by the public entry points.

Everything numeric is coerced to C-contiguous float64; NaN/Inf inputs are
rejected at the boundary so the kernels can assume finite data.
"""

import numbers

import numpy as np


def check_matrix(X, name="X", square=False):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {X.shape}")
    if square and X.shape[0] != X.shape[1]:
        raise ValueError(f"{name} must be square, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return X


def check_vector(x, name="x", length=None):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if x.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if length is not None and x.size != length:
        raise ValueError(f"{name} has length {x.size}, expected {length}")
    if not np.isfinite(x).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return x


def check_ratio(c, name="c"):
    if not isinstance(c, numbers.Real) or not np.isfinite(c):
        raise ValueError(f"{name} must be a finite real number, got {c!r}")
    c = float(c)
    if not 0.0 < c <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1], got {c}")
    return c


def check_count(value, name="count", minimum=1):
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_rng(random_state):
    """Accept None, an int seed, or an existing Generator."""
    if random_state is None:
        return np.random.default_rng()
    if isinstance(random_state, np.random.Generator):
        return random_state
    if isinstance(random_state, numbers.Integral):
        return np.random.default_rng(int(random_state))
    raise ValueError(
        f"random_state must be None, an int, or a numpy Generator, got {random_state!r}"
    )
