"""Well-posedness checks on the half line [0, inf) for first-order systems.

P_1 is Hermitian and invertible, so P_1 = S^* diag(Lambda, Theta) S with S
unitary, Lambda > 0 (n1 x n1) and Theta < 0 (n2 x n2).  A boundary matrix
WB_hat (k x d, full row rank) admits a contraction verdict iff k = n2,
WB_hat = B [U I] S with B invertible, and Lambda + U^* Theta U >= 0; the
independent route tests y^* P_1 y >= 0 on ker WB_hat.  Condition ids:
TA.3 / TA.4 (contraction) and TA2.3 / TA2.4 (unitary group).

The Hamiltonian density never enters the verdicts (the weighted and
unweighted generators are similar); it is checked at validation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import numlin
from .errors import GridTooCoarse, ShapeError, SingularP1
from .model import HALF_LINE, PortHamiltonianSystem
from .verdict import (
    CONTRACTION,
    DISSIPATIVE_ONLY,
    NOT_CONTRACTION,
    UNDETERMINED,
    ConditionResult,
    Verdict,
    family_outcome,
)


@dataclass(frozen=True)
class HalfLineDecomposition:
    """P_1 = S^* diag(Lambda, Theta) S; positive block first."""

    S: np.ndarray
    Lambda: np.ndarray  # (n1, n1) positive diagonal
    Theta: np.ndarray  # (n2, n2) negative diagonal
    n1: int
    n2: int

    @property
    def delta(self) -> np.ndarray:
        d = self.n1 + self.n2
        out = np.zeros((d, d))
        out[: self.n1, : self.n1] = self.Lambda
        out[self.n1 :, self.n1 :] = self.Theta
        return out


@dataclass(frozen=True)
class BoundaryFactorization:
    """WB_hat = B [U I] S with B (k x k) invertible and U (n2 x n1)."""

    B: np.ndarray
    U: np.ndarray
    residual: float


@dataclass(frozen=True)
class FactorizationFailure:
    """Why WB_hat admits no factorization B [U I] S."""

    reason: str  # 'wrong_row_count' | 'singular_trailing_block' | 'rank_deficient'
    detail: str
    diagnostics: dict = field(default_factory=dict)


def decompose_P1(P1, tol: float = None) -> HalfLineDecomposition:
    """Unitary diagonalization of Hermitian P_1 with the positive block first.

    Raises SingularP1 when an eigenvalue sits numerically at zero.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    P1 = np.asarray(P1, dtype=complex)
    S, w = numlin.hermitian_eigendecomposition(P1, tol)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if np.any(np.abs(w) <= tol * scale):
        raise SingularP1("P_1 has an eigenvalue numerically at zero")
    n1 = int(np.sum(w > 0))
    n2 = w.size - n1
    lam = np.diag(w[:n1]) if n1 else np.zeros((0, 0))
    theta = np.diag(w[n1:]) if n2 else np.zeros((0, 0))
    return HalfLineDecomposition(S=S, Lambda=lam, Theta=theta, n1=n1, n2=n2)


def unit_decomposition(n1: int, n2: int) -> HalfLineDecomposition:
    """Decomposition with S = I, Lambda = I, Theta = -I (testing convenience)."""
    d = n1 + n2
    lam = np.eye(n1) if n1 else np.zeros((0, 0))
    theta = -np.eye(n2) if n2 else np.zeros((0, 0))
    return HalfLineDecomposition(S=np.eye(d, dtype=complex), Lambda=lam,
                                 Theta=theta, n1=n1, n2=n2)


def factorize_boundary(WB_hat, decomp: HalfLineDecomposition, tol: float = None):
    """Factor WB_hat as B [U I] S, or explain why that is impossible.

    Needs full row rank, k = n2 and an invertible trailing block of
    WB_hat S^*.  A singular trailing block always certifies failure of the
    kernel test as well: some (0, u) lies in the kernel and u^* Theta u < 0.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    WB_hat = np.asarray(WB_hat, dtype=complex)
    k, d = WB_hat.shape
    if d != decomp.n1 + decomp.n2:
        raise ShapeError(f"WB_hat width {d} does not match P_1 size")
    rank = numlin.numerical_rank(WB_hat, tol)
    if rank < k:
        return FactorizationFailure(
            "rank_deficient", f"WB_hat has rank {rank} < {k} rows",
            {"rank": float(rank)})
    if k != decomp.n2:
        return FactorizationFailure(
            "wrong_row_count",
            f"need exactly n2 = {decomp.n2} independent conditions, got {k}",
            {"k": float(k), "n2": float(decomp.n2)})
    split = WB_hat @ decomp.S.conj().T
    U1, U2 = split[:, : decomp.n1], split[:, decomp.n1 :]
    if k:
        s = np.linalg.svd(U2, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= tol * s[0]:
            return FactorizationFailure(
                "singular_trailing_block",
                "the negative-block columns of WB_hat S^* are singular",
                {"smin_u2": float(s[-1]) if s.size else 0.0})
    B = U2
    U = np.linalg.solve(U2, U1) if k else np.zeros((0, decomp.n1), dtype=complex)
    eye = np.eye(decomp.n2, dtype=complex)
    recon = B @ np.hstack([U, eye]) @ decomp.S if k else WB_hat
    residual = float(np.linalg.norm(recon - WB_hat, 2)) if WB_hat.size else 0.0
    return BoundaryFactorization(B=B, U=U, residual=residual)


def _reduce_rows(WB_hat, tol):
    """Full-row-rank representative with the same kernel (orthonormal rows)."""
    WB_hat = np.asarray(WB_hat, dtype=complex)
    basis = numlin.orthonormal_columns(WB_hat.conj().T, tol)
    return basis.conj().T


def _kernel_quadratic(WB_hat, P1, tol):
    K = numlin.kernel_basis(WB_hat, tol)
    return K.conj().T @ np.asarray(P1, dtype=complex) @ K, K.shape[1]


def check_contraction_halfline(sys: PortHamiltonianSystem) -> Verdict:
    """TA.3 (kernel sign test) against TA.4 (inertia factorization test).

    Both also require Re P0 <= 0.  The two routes are equivalent whenever
    the factorization hypothesis (full row rank, k <= n2) holds, and the
    discrepancy flag guards that equivalence numerically.
    """
    merged = analyze_halfline(sys)
    conds = tuple(c for c in merged.conditions if c.condition_id.startswith("TA."))
    _, disc = family_outcome(conds)
    return Verdict(conditions=conds, consensus=merged.consensus,
                   unitary=None, discrepancy=disc, warnings=merged.warnings)


def _contraction_conditions(sys, decomp, WB_eff, re_P0, tol):
    k_eff = WB_eff.shape[0]
    p0rep = numlin.definiteness(re_P0, tol)
    p0_nsd, p0_max = p0rep.is_nsd, float(p0rep.max_eig)

    Gp, kdim = _kernel_quadratic(WB_eff, sys.P[1], tol)
    grep = numlin.definiteness(Gp, tol)
    ta3 = ConditionResult(
        "TA.3", True, bool(grep.is_psd and p0_nsd),
        {
            "kernel_dim": float(kdim),
            "min_eig_kernel_form": grep.min_eig,
            "re_p0_max_eig": p0_max,
        },
    )

    if k_eff > decomp.n2:
        ta4 = ConditionResult(
            "TA.4", False, None,
            {"k": float(k_eff), "n2": float(decomp.n2)},
            reason=f"needs k <= n2 = {decomp.n2}, got k = {k_eff}")
        return ta3, ta4, None

    fact = factorize_boundary(WB_eff, decomp, tol)
    if isinstance(fact, FactorizationFailure):
        diags = {"k": float(k_eff), "n2": float(decomp.n2)}
        diags.update(fact.diagnostics)
        ta4 = ConditionResult("TA.4", True, False, diags, reason=fact.detail)
        return ta3, ta4, None

    M = decomp.Lambda + fact.U.conj().T @ decomp.Theta @ fact.U
    mrep = numlin.definiteness(M, tol)
    ta4 = ConditionResult(
        "TA.4", True, bool(mrep.is_psd and p0_nsd),
        {
            "min_eig_lambda_utu": mrep.min_eig,
            "factorization_residual": fact.residual,
            "re_p0_max_eig": p0_max,
        },
    )
    return ta3, ta4, fact


def _unitary_conditions(sys, decomp, WB_eff, re_P0, tol):
    k_eff = WB_eff.shape[0]
    p0rep = numlin.definiteness(re_P0, tol)
    p0_zero = p0rep.is_zero
    p0_norm = float(max(abs(p0rep.min_eig), abs(p0rep.max_eig)))

    Gp, kdim = _kernel_quadratic(WB_eff, sys.P[1], tol)
    grep = numlin.definiteness(Gp, tol)
    ta23 = ConditionResult(
        "TA2.3", True, bool(grep.is_zero and p0_zero),
        {
            "kernel_dim": float(kdim),
            "norm_kernel_form": max(abs(grep.min_eig), abs(grep.max_eig)),
            "re_p0_norm": p0_norm,
        },
    )

    n1, n2 = decomp.n1, decomp.n2
    if k_eff > min(n1, n2):
        ta24 = ConditionResult(
            "TA2.4", False, None,
            {"k": float(k_eff), "n1": float(n1), "n2": float(n2)},
            reason=f"needs k <= min(n1, n2) = {min(n1, n2)}, got k = {k_eff}")
        return ta23, ta24

    if not (k_eff == n1 == n2):
        ta24 = ConditionResult(
            "TA2.4", True, False,
            {"k": float(k_eff), "n1": float(n1), "n2": float(n2)},
            reason="unitary generation needs k = n1 = n2")
        return ta23, ta24

    split = WB_eff @ decomp.S.conj().T
    U1, U2 = split[:, :n1], split[:, n1:]
    inv_ok = True
    smin1 = smin2 = 0.0
    if k_eff:
        s1 = np.linalg.svd(U1, compute_uv=False)
        s2 = np.linalg.svd(U2, compute_uv=False)
        smin1, smin2 = float(s1[-1]), float(s2[-1])
        inv_ok = (s1[0] > 0 and s1[-1] > tol * s1[0]
                  and s2[0] > 0 and s2[-1] > tol * s2[0])
    if not inv_ok:
        ta24 = ConditionResult(
            "TA2.4", True, False,
            {"smin_u1": smin1, "smin_u2": smin2},
            reason="both blocks of WB_hat S^* must be invertible")
        return ta23, ta24
    U2i = np.linalg.inv(U2) if k_eff else U2
    M = decomp.Lambda + U1.conj().T @ U2i.conj().T @ decomp.Theta @ U2i @ U1
    znorm = float(np.linalg.norm(M, 2)) if M.size else 0.0
    scale = max(1.0, float(np.linalg.norm(decomp.Lambda, 2)) if decomp.Lambda.size else 1.0)
    ta24 = ConditionResult(
        "TA2.4", True, bool(znorm <= tol * scale * 10.0 and p0_zero),
        {
            "norm_lambda_utu": znorm,
            "smin_u1": smin1,
            "smin_u2": smin2,
            "re_p0_norm": p0_norm,
        },
    )
    return ta23, ta24


def analyze_halfline(sys: PortHamiltonianSystem) -> Verdict:
    """Run both contraction routes and both unitary routes, cross-checked.

    Row-rank-deficient WB_hat is reduced to an orthonormal-row
    representative (same kernel) with a warning before any row counting.
    """
    if sys.interval != HALF_LINE:
        raise ShapeError("analyze_halfline needs a half_line system")
    tol = sys.tol.check
    decomp = decompose_P1(sys.P[1], sys.tol.tau_rank)
    re_P0 = sys.re_P0()

    warnings = []
    WB_eff = sys.WB_hat
    k = sys.n_conditions
    if k and numlin.numerical_rank(WB_eff, tol) < k:
        WB_eff = _reduce_rows(WB_eff, tol)
        warnings.append(
            f"WB_hat rows are linearly dependent; reduced {k} rows to "
            f"{WB_eff.shape[0]} with the same kernel")

    ta3, ta4, _ = _contraction_conditions(sys, decomp, WB_eff, re_P0, tol)
    ta23, ta24 = _unitary_conditions(sys, decomp, WB_eff, re_P0, tol)
    conditions = (ta3, ta4, ta23, ta24)

    contraction_value, disc_c = family_outcome([ta3, ta4])
    unitary_value, disc_u = family_outcome([ta23, ta24])
    discrepancy = disc_c or disc_u

    if ta4.applicable:
        if contraction_value is True:
            consensus = CONTRACTION
        elif contraction_value is False:
            consensus = NOT_CONTRACTION
        else:
            consensus = UNDETERMINED
    else:
        # k > n2: dissipativity can hold but generation is not certified.
        consensus = DISSIPATIVE_ONLY if ta3.holds else NOT_CONTRACTION

    if ta24.applicable:
        unitary = unitary_value if not disc_u else None
    else:
        unitary = None if ta23.holds else False

    if unitary is True and consensus != CONTRACTION:
        discrepancy = True
        unitary = None
    if consensus == NOT_CONTRACTION and unitary is None and ta24.applicable:
        unitary = False

    return Verdict(
        conditions=conditions,
        consensus=consensus,
        unitary=unitary,
        discrepancy=discrepancy,
        warnings=tuple(warnings),
    )


def check_unitary_halfline(sys: PortHamiltonianSystem) -> Verdict:
    """TA2.3 (kernel zero test) against TA2.4 (factorized zero identity)."""
    merged = analyze_halfline(sys)
    conds = tuple(c for c in merged.conditions if c.condition_id.startswith("TA2."))
    _, disc = family_outcome(conds)
    return Verdict(conditions=conds, consensus=merged.consensus,
                   unitary=merged.unitary, discrepancy=disc,
                   warnings=merged.warnings)


def solve_resolvent_halfline(decomp: HalfLineDecomposition, U, y,
                             L: float = None, n_cells: int = 3000,
                             residual_threshold: float = None):
    """Solve v - diag(Lambda, Theta) v' = y with the coupling U v1(0) + v2(0) = 0.

    y: either an array (n1+n2, n+1) of samples on the uniform grid over
    [0, L], or a callable t -> vector, sampled on the default grid
    (L = 30 * max Lambda, step L / n_cells).  The data should be
    negligible near L (the half-line tail is truncated).  The positive
    block evaluates the decaying-kernel integral by a composite trapezoid
    rule written as an exact backward recurrence; the negative block
    integrates the stable ODE v' = Theta^{-1}(v - y) forward with
    classical fourth-order steps (cubic-spline samples at half steps).
    Returns (v, residual) with the residual measured as the max over
    interior nodes of |v - Delta v' - y| using fourth-order central
    differences; raises GridTooCoarse above residual_threshold.
    """
    n1, n2 = decomp.n1, decomp.n2
    d = n1 + n2
    if L is None:
        lam_max = float(np.max(np.diag(decomp.Lambda))) if n1 else 1.0
        L = 30.0 * lam_max
    if callable(y):
        grid = np.linspace(0.0, L, n_cells + 1)
        y = np.stack([np.asarray(y(float(tt)), dtype=complex).reshape(d)
                      for tt in grid], axis=1)
    y = np.asarray(y, dtype=complex)
    if y.ndim != 2 or y.shape[0] != d:
        raise ShapeError(f"y must be ({d}, n+1), got {y.shape}")
    npts = y.shape[1]
    if npts < 6:
        raise GridTooCoarse("need at least 6 grid points", residual=np.inf)
    h = L / (npts - 1)
    t = np.linspace(0.0, L, npts)
    v = np.zeros((d, npts), dtype=complex)

    lam = np.diag(decomp.Lambda).real if n1 else np.zeros(0)
    for i in range(n1):
        li = lam[i]
        decay = np.exp(-h / li)
        yi = y[i] / li
        xi = np.zeros(npts, dtype=complex)
        for j in range(npts - 2, -1, -1):
            xi[j] = decay * xi[j + 1] + 0.5 * h * (yi[j] + decay * yi[j + 1])
        v[i] = xi

    if n2:
        U = np.asarray(U, dtype=complex).reshape(n2, n1)
        v2_0 = -U @ v[:n1, 0] if n1 else np.zeros(n2, dtype=complex)
        theta = np.diag(decomp.Theta).real
        splines_re = [CubicSpline(t, y[n1 + i].real) for i in range(n2)]
        splines_im = [CubicSpline(t, y[n1 + i].imag) for i in range(n2)]

        def rhs(tau, w):
            ys = np.array([sr(tau) + 1j * si(tau)
                           for sr, si in zip(splines_re, splines_im)])
            return (w - ys) / theta

        w = v2_0.copy()
        v[n1:, 0] = w
        for j in range(npts - 1):
            tj = t[j]
            k1 = rhs(tj, w)
            k2 = rhs(tj + 0.5 * h, w + 0.5 * h * k1)
            k3 = rhs(tj + 0.5 * h, w + 0.5 * h * k2)
            k4 = rhs(tj + h, w + h * k3)
            w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            v[n1:, j + 1] = w

    # residual with 4th-order central differences on interior nodes
    delta = np.concatenate([lam, np.diag(decomp.Theta).real if n2 else np.zeros(0)])
    dv = (v[:, :-4] - 8 * v[:, 1:-3] + 8 * v[:, 3:-1] - v[:, 4:]) / (12.0 * h)
    mid = v[:, 2:-2]
    res = mid - delta[:, None] * dv - y[:, 2:-2]
    residual = float(np.max(np.abs(res))) if res.size else 0.0
    if residual_threshold is not None and residual > residual_threshold:
        raise GridTooCoarse(
            f"resolvent residual {residual:.3e} above {residual_threshold:.3e}; "
            "refine the grid", residual=residual)
    return v, residual
