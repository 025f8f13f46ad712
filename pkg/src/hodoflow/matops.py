"""Dense matrix operations used throughout the solver.

Everything here works on small (n <= 4 in practice) real matrices.  The two
phi-functions are the workhorses of the implicit solution formulas:

    phi1(A, t) = A^-1 (e^{tA} - 1)            = t * phi_1(tA)
    phi2(A, t) = A^-2 (e^{tA} - 1 - tA)       = t^2 * phi_2(tA)

with the dimensionless entire functions phi_1(z) = (e^z - 1)/z and
phi_2(z) = (e^z - 1 - z)/z^2.  Both are evaluated without ever inverting A, so
singular (including nilpotent and exactly zero) matrices are fine:  small
arguments go through a truncated Taylor series, everything else through the
block-augmented exponential

    exp [[tA, I, 0],   =  [[e^{tA}, phi_1(tA), phi_2(tA)],
         [0,  0, I],        [0,      I,         t...    ],
         [0,  0, 0]]        [0,      0,         I       ]]

whose first block row delivers the phi functions directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import OverflowMatrixError, SingularMatrixError

# ``small argument'' cutoff for the Taylor path, in the infinity norm of tA
_TAYLOR_CUTOFF = 0.25
# relative truncation target for the Taylor series
_TAYLOR_RTOL = 1e-17
# eigenvector-matrix condition number above which we refuse to call a matrix
# diagonalizable (defective matrices come out of LAPACK with cond(V) ~ 1/sqrt(eps))
_DIAG_COND_LIMIT = 1e8
# conditioning ceiling for solve()
_SOLVE_COND_LIMIT = 1e13


def _as_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def mat_exp(A, t=1.0):
    """e^{tA} via scaling-and-squaring (scipy.linalg.expm).

    Raises OverflowMatrixError if the result leaves the representable range
    (reported, never silently saturated).
    """
    A = _as_square(A)
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(t * A)
    if not np.all(np.isfinite(E)):
        raise OverflowMatrixError(
            f"exp(tA) overflowed for t={t!r}, ||A||={np.linalg.norm(A, np.inf):.3e}"
        )
    return E


def _phi_series(B, k):
    """Taylor sum of phi_k(B) = sum_{j>=0} B^j / (j+k)!, truncated at 1e-17 relative."""
    n = B.shape[0]
    term = np.eye(n) / _factorial(k)
    out = term.copy()
    for j in range(1, 60):
        term = term @ B / (k + j)
        out += term
        if np.linalg.norm(term, np.inf) <= _TAYLOR_RTOL * max(np.linalg.norm(out, np.inf), 1e-300):
            return out
    return out


def _factorial(k):
    f = 1
    for i in range(2, k + 1):
        f *= i
    return f


def _phi_augmented(B, k):
    """phi_k(B) from the block-augmented exponential; no inversion, singular-safe."""
    n = B.shape[0]
    m = n * (k + 1)
    W = np.zeros((m, m))
    W[:n, :n] = B
    for blk in range(k):
        r = blk * n
        W[r : r + n, r + n : r + 2 * n] = np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(W)
    if not np.all(np.isfinite(E)):
        raise OverflowMatrixError("phi-function evaluation overflowed")
    return E[:n, k * n : (k + 1) * n]


def _phi_dimless(B, k):
    if np.linalg.norm(B, np.inf) < _TAYLOR_CUTOFF:
        return _phi_series(B, k)
    return _phi_augmented(B, k)


def phi1(A, t):
    """A^-1 (e^{tA} - 1) = t * phi_1(tA); valid for singular A, zero matrix at t = 0."""
    A = _as_square(A)
    return t * _phi_dimless(t * A, 1)


def phi2(A, t):
    """A^-2 (e^{tA} - 1 - tA) = t^2 * phi_2(tA); valid for singular A."""
    A = _as_square(A)
    return (t * t) * _phi_dimless(t * A, 2)


@dataclass
class Spectrum:
    """Eigenvalues plus the two facts the periodicity analysis needs."""

    eigenvalues: np.ndarray
    diagonalizable: bool
    eigvec_cond: float


def eig(A):
    """Eigenvalues of A, sorted deterministically, with a diagonalizability verdict."""
    A = _as_square(A)
    w, V = np.linalg.eig(A)
    order = np.lexsort((np.round(w.imag, 12), np.round(w.real, 12)))
    w = w[order]
    cond = float(np.linalg.cond(V))
    return Spectrum(eigenvalues=w, diagonalizable=bool(cond < _DIAG_COND_LIMIT), eigvec_cond=cond)


def rank(A, tol=1e-10):
    """Numerical rank: number of singular values above tol * sigma_max."""
    A = _as_square(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def det(A):
    return float(np.linalg.det(_as_square(A)))


def solve(A, b):
    """A x = b with an explicit conditioning guard instead of garbage output."""
    A = _as_square(A)
    b = np.asarray(b, dtype=float)
    try:
        cond = np.linalg.cond(A)
    except np.linalg.LinAlgError:  # pragma: no cover - cond rarely fails
        cond = np.inf
    if not np.isfinite(cond) or cond > _SOLVE_COND_LIMIT:
        raise SingularMatrixError(f"matrix numerically singular (cond ~ {cond:.3e})")
    return np.linalg.solve(A, b)
