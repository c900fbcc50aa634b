"""Compressed-sensing codec with a per-call compression ratio.

A signal x of dimension n is compressed to y = Phi x, where Phi is an
m x n Gaussian matrix re-derived deterministically from (master_seed, m, n)
on both the encoder and decoder side, so only y, m, and the seed travel.
Recovery solves the L1 sparsity program over the configured basis, either
exactly (LP) or approximately (ISTA).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.optimize import linprog
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning

from ._validation import check_ratio, check_vector
from .exceptions import RecoveryError
from .numerics import gaussian, seeded_rng


def ratio_to_m(c, n):
    """Measurement count for ratio ``c``: round half away from zero, clamp to [1, n]."""
    c = check_ratio(c)
    m = int(math.floor(c * n + 0.5))
    return min(max(m, 1), n)


def derive_phi(master_seed, m, n):
    """Gaussian sensing matrix keyed by (master_seed, m, n).

    Equal arguments give bitwise-equal matrices, which is what lets the
    decoder rebuild the encoder's projection without transmitting it.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    return gaussian(seeded_rng(master_seed, m, n), m, n)


def dct_basis(n):
    """Orthonormal DCT-II synthesis basis: columns are the basis vectors."""
    return scipy.fft.dct(np.eye(n), axis=0, norm="ortho").T


def rmse(x, x_hat):
    """Root mean squared error between two equal-length vectors."""
    x = check_vector(x, "x")
    x_hat = check_vector(x_hat, "x_hat", length=x.size)
    return float(np.sqrt(np.mean((x - x_hat) ** 2)))


@dataclass(frozen=True)
class ScoreParams:
    """Coefficients of the compression score, trading ratio against error."""

    k1: float = 1.0
    k2: float = 1.0
    k3: float = 3.0
    k4: float = 1.0
    k5: float = 1.5
    k6: float = 1.0

    def as_list(self):
        return [self.k1, self.k2, self.k3, self.k4, self.k5, self.k6]

    @classmethod
    def from_list(cls, ks):
        if len(ks) != 6:
            raise ValueError(f"expected 6 score coefficients, got {len(ks)}")
        return cls(*(float(k) for k in ks))


def compression_score(c, e, params=ScoreParams()):
    """Score of compressing at ratio ``c`` with reconstruction error ``e``.

    k1 * (-k2 * c**k3 + k4 - k5 * e**k6), reported raw (it can go negative
    for large errors; clamping would hide reward signal).
    """
    c = check_ratio(c)
    e = float(e)
    if e < 0.0 or not np.isfinite(e):
        raise ValueError(f"e must be finite and >= 0, got {e}")
    p = params
    return p.k1 * (-p.k2 * c**p.k3 + p.k4 - p.k5 * e**p.k6)


@dataclass(frozen=True)
class CompressedVector:
    """Measurements plus the metadata a decoder needs to re-derive Phi."""

    y: np.ndarray
    m: int
    master_seed: int

    def __post_init__(self):
        object.__setattr__(self, "y", check_vector(self.y, "y"))
        if self.y.size != self.m:
            raise ValueError(f"y has length {self.y.size}, expected m={self.m}")


class CsCodec(BaseEstimator):
    """Encoder/decoder pair sharing a deterministic sensing-matrix family.

    Parameters
    ----------
    n : int
        Signal dimension.
    basis : {"identity", "dct"}
        Sparsifying basis. Identity suits data that is already sparse in
        the sample domain; DCT is for smooth, non-sparse raw signals.
    solver : {"lp", "ista"}
        "lp" solves the equality-constrained L1 program exactly; "ista"
        runs iterative shrinkage on the lagrangian form and is documented
        as approximate.
    master_seed : int
        Root seed of the sensing-matrix family.
    ista_budget : int
        Maximum ISTA iterations before giving up with a warning.
    ista_shrinkage : float
        L1 weight of the ISTA objective.
    ista_tol : float
        Relative iterate-change threshold that stops ISTA early.
    phi_factory : callable or None
        Override hook mapping (master_seed, m, n) to a sensing matrix;
        tests use it to pin Phi. None means the seeded Gaussian family.
    """

    def __init__(
        self,
        n,
        basis="identity",
        solver="lp",
        master_seed=0,
        ista_budget=1000,
        ista_shrinkage=1e-4,
        ista_tol=1e-6,
        phi_factory=None,
    ):
        self.n = n
        self.basis = basis
        self.solver = solver
        self.master_seed = master_seed
        self.ista_budget = ista_budget
        self.ista_shrinkage = ista_shrinkage
        self.ista_tol = ista_tol
        self.phi_factory = phi_factory
        self._validate()
        self._cache = {}

    def _validate(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.basis not in ("identity", "dct"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.solver not in ("lp", "ista"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if int(self.ista_budget) < 1:
            raise ValueError("ista_budget must be positive")
        if float(self.ista_shrinkage) <= 0.0:
            raise ValueError("ista_shrinkage must be positive")
        if float(self.ista_tol) <= 0.0:
            raise ValueError("ista_tol must be positive")

    def psi(self):
        """Synthesis basis matrix (identity is returned lazily, not stored)."""
        if self.basis == "dct":
            if "psi" not in self._cache:
                self._cache["psi"] = dct_basis(self.n)
            return self._cache["psi"]
        return np.eye(self.n)

    def _sensing(self, m):
        """(Phi, A=Phi Psi, lipschitz) for m measurements, cached per m."""
        key = ("sens", m)
        if key not in self._cache:
            factory = self.phi_factory if self.phi_factory is not None else derive_phi
            phi = np.asarray(factory(self.master_seed, m, self.n), dtype=np.float64)
            if phi.shape != (m, self.n):
                raise ValueError(
                    f"sensing matrix has shape {phi.shape}, expected {(m, self.n)}"
                )
            A = phi @ self.psi() if self.basis == "dct" else phi
            lipschitz = float(np.linalg.norm(A, 2) ** 2)
            self._cache[key] = (phi, A, lipschitz)
        return self._cache[key]

    def compress(self, x, c):
        """Project ``x`` to m = ratio_to_m(c, n) Gaussian measurements."""
        x = check_vector(x, "x", length=int(self.n))
        m = ratio_to_m(c, int(self.n))
        phi, _, _ = self._sensing(m)
        return CompressedVector(y=phi @ x, m=m, master_seed=int(self.master_seed))

    def recover(self, cv):
        """Reconstruct the signal behind ``cv`` via L1 minimization."""
        if not isinstance(cv, CompressedVector):
            raise TypeError("recover expects a CompressedVector")
        if cv.master_seed != int(self.master_seed):
            raise ValueError(
                f"compressed vector carries master_seed={cv.master_seed}, "
                f"codec has {self.master_seed}"
            )
        _, A, lipschitz = self._sensing(cv.m)
        if self.solver == "lp":
            xs = _l1_equality_lp(A, cv.y)
        else:
            xs = _ista(
                A,
                cv.y,
                lipschitz,
                lam=float(self.ista_shrinkage),
                tol=float(self.ista_tol),
                budget=int(self.ista_budget),
            )
        if self.basis == "dct":
            return self.psi() @ xs
        return xs


def _l1_equality_lp(A, y):
    """min ||x||_1 s.t. A x = y, via the standard positive split x = u - v.

    Variables (u, v) >= 0, objective sum(u + v), equalities A u - A v = y.
    """
    m, n = A.shape
    res = linprog(
        c=np.ones(2 * n),
        A_eq=np.hstack([A, -A]),
        b_eq=y,
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise RecoveryError(
            f"L1 recovery LP failed (status {res.status}): {res.message}"
        )
    return res.x[:n] - res.x[n:]


def _ista(A, y, lipschitz, lam, tol, budget):
    """Iterative shrinkage for 0.5*||A x - y||^2 + lam*||x||_1, step 1/L."""
    step = 1.0 / lipschitz
    thresh = lam * step
    x = np.zeros(A.shape[1])
    for _ in range(budget):
        grad = A.T @ (A @ x - y)
        z = x - step * grad
        x_next = np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)
        delta = np.linalg.norm(x_next - x)
        x = x_next
        if delta <= tol * max(1.0, np.linalg.norm(x)):
            return x
    warnings.warn(
        f"ISTA stopped after {budget} iterations without reaching tol={tol}",
        ConvergenceWarning,
    )
    return x
