"""Dense complex linear algebra and quadrature helpers.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .errors import NonConvergenceWarning, SingularMatrix

PIVOT_RTOL = 1e-14


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def lu_factor(A):
    """LU factorization with partial pivoting and a relative singularity check.

    Raises SingularMatrix when a pivot magnitude drops below
    ``PIVOT_RTOL * max|A_ij|``.
    """
    A = _as_square(A)
    scale = np.abs(A).max()
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported through our own threshold below
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * scale:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * max entry {scale:.3e}"
        )
    return lu, piv


def lu_solve(A, B, trans: bool = False) -> np.ndarray:
    """Solve ``A X = B`` (or ``A^T X = B`` with ``trans=True``).

    B may be a vector or an n x m matrix; the result has B's shape.
    """
    B = np.asarray(B, dtype=complex)
    factors = lu_factor(A)
    if B.shape[0] != factors[0].shape[0]:
        raise ValueError(f"B has {B.shape[0]} rows, A is {factors[0].shape[0]}x{factors[0].shape[0]}")
    return la.lu_solve(factors, B, trans=1 if trans else 0, check_finite=False)


def invert(A) -> np.ndarray:
    A = _as_square(A)
    return lu_solve(A, np.eye(A.shape[0], dtype=complex))


@dataclass(frozen=True)
class PowerIterationInfo:
    converged: bool
    iterations: int


def spectral_norm(A, tol: float = 1e-6, max_iter: int = 500, full_output: bool = False):
    """Largest singular value of A by power iteration on ``A^H A``.

    Starts from the normalized all-ones vector and stops when two successive
    estimates agree to ``tol`` relative. If the cap is reached a
    NonConvergenceWarning is issued and the best estimate is returned.

    With ``full_output=True`` returns ``(sigma, PowerIterationInfo)``.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ValueError("spectral_norm expects a 2-D array")
    if not np.any(A):
        return (0.0, PowerIterationInfo(True, 0)) if full_output else 0.0

    n = A.shape[1]
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    if not np.any(A @ v):
        # all-ones lies in the null space; restart on the heaviest column
        v = np.zeros(n, dtype=complex)
        v[np.argmax(np.linalg.norm(A, axis=0))] = 1.0

    sigma = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = A @ v
        u = A.conj().T @ w
        new = float(np.sqrt(np.vdot(w, w).real))
        unorm = np.linalg.norm(u)
        if unorm == 0.0:
            sigma, converged = new, True
            break
        v = u / unorm
        if abs(new - sigma) <= tol * new:
            sigma, converged = new, True
            break
        sigma = new

    if not converged:
        warnings.warn(
            f"power iteration did not reach rtol={tol:g} in {max_iter} iterations",
            NonConvergenceWarning,
            stacklevel=2,
        )
    if full_output:
        return sigma, PowerIterationInfo(converged, it)
    return sigma


@lru_cache(maxsize=64)
def _legendre_rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, lo: float, hi: float):
    """n-point Gauss-Legendre nodes and weights mapped to [lo, hi]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not lo < hi:
        raise ValueError("require lo < hi")
    x, w = _legendre_rule(int(n))
    half = 0.5 * (hi - lo)
    return half * x + 0.5 * (hi + lo), half * w


def composite_gauss_legendre(breaks, n: int):
    """Apply the n-point rule on every panel between consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _legendre_rule(int(n))
    lo = breaks[:-1, None]
    hi = breaks[1:, None]
    half = 0.5 * (hi - lo)
    return (half * x + 0.5 * (hi + lo)).ravel(), (half * w).ravel()


def wrap_to_pi(angle):
    """Wrap radians into the half-open interval [-pi, pi)."""
    a = np.asarray(angle, dtype=float)
    out = a - 2.0 * np.pi * np.floor((a + np.pi) / (2.0 * np.pi))
    out = np.where(out >= np.pi, out - 2.0 * np.pi, out)
    if out.ndim == 0:
        return float(out)
    return out
