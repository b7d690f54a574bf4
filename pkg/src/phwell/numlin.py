"""Tolerance-aware numerical linear algebra primitives shared by all checkers.

Rank and kernel decisions are made through singular values with a relative
threshold; definiteness decisions through eigenvalue extremes of the
symmetrized matrix.  Nothing here depends on the problem structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class DefinitenessReport:
    """Eigenvalue extremes of a Hermitian matrix and the resulting verdict.

    verdict is one of 'positive_semidefinite', 'negative_semidefinite',
    'indefinite', 'zero'.  'zero' means both semidefinite verdicts hold.
    """

    min_eig: float
    max_eig: float
    verdict: str
    tolerance_used: float

    @property
    def is_psd(self) -> bool:
        return self.verdict in ("positive_semidefinite", "zero")

    @property
    def is_nsd(self) -> bool:
        return self.verdict in ("negative_semidefinite", "zero")

    @property
    def is_zero(self) -> bool:
        return self.verdict == "zero"


def _as2d(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {M.shape}")
    return M


def kernel_basis(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical kernel of M (columns, q x r).

    Columns span ker M in the sense that ||M K|| <= tol * sigma_max(M);
    r = q - numerical_rank(M).  A matrix with no rows (or all-zero rows)
    has the full identity as kernel basis.
    """
    M = _as2d(M)
    p, q = M.shape
    if p == 0 or q == 0:
        return np.eye(q, dtype=complex)
    _, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(q, dtype=complex)
    rank = int(np.sum(s > tol * smax))
    return vh[rank:].conj().T


def numerical_rank(M, tol: float = DEFAULT_TOL) -> int:
    """Rank of M with singular values below tol * sigma_max treated as zero."""
    M = _as2d(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def smallest_singular_value(M) -> float:
    """Smallest of the min(p, q) singular values of M (0.0 if empty)."""
    M = _as2d(M)
    if M.size == 0:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1])


def operator_norm(M) -> float:
    """Largest singular value of M; 0.0 for an empty matrix."""
    M = _as2d(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_part(M) -> np.ndarray:
    M = _as2d(M)
    return 0.5 * (M + M.conj().T)


def definiteness(M, tol: float = DEFAULT_TOL) -> DefinitenessReport:
    """Classify a (numerically) Hermitian matrix by its eigenvalue extremes.

    The matrix is symmetrized before the eigensolve; a deviation
    ||M - M*|| beyond tol * max(1, ||M||) raises NotHermitian.  Thresholds
    are relative: PSD iff min_eig >= -tol * max(1, ||M||).
    """
    M = _as2d(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("definiteness needs a square matrix")
    if M.shape[0] == 0:
        # Vacuous form: semidefinite in both directions.
        return DefinitenessReport(0.0, 0.0, "zero", tol)
    dev = np.linalg.norm(M - M.conj().T, 2)
    scale0 = max(1.0, float(np.linalg.norm(M, 2)))
    if dev > tol * scale0 * 10.0:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    w = np.linalg.eigvalsh(hermitian_part(M))
    lo, hi = float(w[0]), float(w[-1])
    scale = max(1.0, abs(lo), abs(hi))
    psd = lo >= -tol * scale
    nsd = hi <= tol * scale
    if psd and nsd:
        verdict = "zero"
    elif psd:
        verdict = "positive_semidefinite"
    elif nsd:
        verdict = "negative_semidefinite"
    else:
        verdict = "indefinite"
    return DefinitenessReport(lo, hi, verdict, tol)


def hermitian_eigendecomposition(P, tol: float = DEFAULT_TOL):
    """Factor Hermitian P as S* @ diag(delta) @ S with unitary S.

    Eigenvalues are sorted descending, so any positive block precedes the
    negative block.  Returns (S, delta) with delta a 1-d real array.
    """
    P = _as2d(P)
    dev = np.linalg.norm(P - P.conj().T, 2)
    if P.size and dev > tol * max(1.0, np.linalg.norm(P, 2)) * 10.0:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    w, u = np.linalg.eigh(hermitian_part(P))
    order = np.argsort(-w)
    w = w[order]
    u = u[:, order]
    # P = U diag(w) U*  =>  S = U* so that P = S* diag(w) S.
    return u.conj().T, w


def inertia(P, tol: float = DEFAULT_TOL):
    """Counts (n_pos, n_zero, n_neg) of eigenvalues of Hermitian P.

    Eigenvalues within tol * max(1, |lambda|_max) of zero count as zero.
    """
    P = _as2d(P)
    if P.shape[0] == 0:
        return 0, 0, 0
    w = np.linalg.eigvalsh(hermitian_part(P))
    scale = max(1.0, float(np.max(np.abs(w))))
    thr = tol * scale
    n_pos = int(np.sum(w > thr))
    n_neg = int(np.sum(w < -thr))
    n_zero = P.shape[0] - n_pos - n_neg
    return n_pos, n_zero, n_neg


def principal_angles(A, B) -> np.ndarray:
    """Principal angles between the column spans of A and B (radians).

    Both inputs are orthonormalized internally.  Small angles come from
    the sine-based formula (arccos alone cannot resolve below ~1e-8).
    """
    A = _as2d(A)
    B = _as2d(B)
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    cos_s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    theta = np.arccos(np.clip(cos_s, -1.0, 1.0))
    # residual of B against span(A): singular values are the sines
    resid = qb - qa @ (qa.conj().T @ qb)
    sin_s = np.sort(np.linalg.svd(resid, compute_uv=False))
    small = cos_s > np.sqrt(0.5)
    theta[small] = np.arcsin(np.clip(sin_s[: int(np.sum(small))], 0.0, 1.0))
    return theta


def orthonormal_columns(A, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of A (via SVD, rank-revealing)."""
    A = _as2d(A)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    rank = int(np.sum(s > tol * s[0]))
    return u[:, :rank]
