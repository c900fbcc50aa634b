"""Seeded random streams and the small dense linear-algebra kernel.

Matrices and vectors are plain float64 numpy arrays throughout. Random
streams are PCG64 generators: one seed gives one reproducible stream, and
the stream is bit-stable within a build (no cross-implementation promise).
"""

import numpy as np
from scipy.special import expit

from .exceptions import SingularMatrixError

_U64 = (1 << 64) - 1


def make_rng(seed):
    """Fresh generator for ``seed``; equal seeds give identical streams."""
    return np.random.default_rng(int(seed) & _U64)


def seeded_rng(*keys):
    """Generator keyed by a tuple of integers (order-sensitive).

    Used wherever two sides of the system must re-derive the same random
    object independently, e.g. the sensing matrix keyed by (seed, m, n).
    """
    entropy = [int(k) & _U64 for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def gaussian(rng, rows, cols):
    """rows x cols matrix of i.i.d. standard normals, drawn in row-major order."""
    if rows < 1 or cols < 1:
        raise ValueError(f"gaussian requires rows, cols >= 1, got ({rows}, {cols})")
    return rng.standard_normal((rows, cols))


def solve(A, B):
    """Solve A X = B for X with a dense LU factorization.

    Every inverse in the learning recursions is routed through here rather
    than formed explicitly.

    Raises
    ------
    SingularMatrixError
        If the factorization detects rank deficiency.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise ValueError(
            f"B has {B.shape[0]} rows, expected {A.shape[0]} to match A"
        )
    try:
        X = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"singular system: {exc}") from exc
    if not np.isfinite(X).all():
        raise SingularMatrixError("solve produced non-finite entries")
    return X


def sigmoid(z):
    """Numerically safe logistic function, elementwise over arrays."""
    return expit(z)


def sigmoid_grad(z):
    """Derivative of the logistic function: sigmoid(z) * (1 - sigmoid(z))."""
    s = expit(z)
    return s * (1.0 - s)
