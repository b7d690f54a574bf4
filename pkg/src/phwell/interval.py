"""Equivalent well-posedness conditions on the unit interval, cross-checked.

For a system with square boundary operator (k = N*d) the contraction family
T1.3, T1.4, T1.5, C2.6, C2.7 is provably equivalent, as is the unitary
family T3.3, T3.4, T3.5, C3.6, C3.7; analyze_interval evaluates all of
them independently and flags any disagreement.  For k != N*d only the
kernel tests T1.5 / T3.5 apply and no generation verdict is certified.

Condition ids (fixed in the JSON schema):
  RANBED -- range containment ran(W1-W2) <= ran(W1+W2), informational
  T1.3   -- W1+W2 injective and W_B Sigma W_B^* >= 0
  T1.4   -- W1+W2 injective and ||V|| <= 1
  T1.5   -- boundary kernel energy form negative semidefinite
  C2.6   -- W_B surjective and W_B Sigma W_B^* >= 0
  C2.7   -- W_B surjective and ||V|| <= 1
  T3.x / C3.x -- the corresponding zero / isometry variants
All contraction-family conditions additionally require Re P0 <= 0; the
unitary family requires Re P0 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import ShapeError
from .model import (
    PortHamiltonianSystem,
    UNIT_INTERVAL,
    derive_boundary_operator,
)
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
class VExtraction:
    """Result of solving (W1+W2) V = W1-W2; V is None when W1+W2 is singular."""

    V: np.ndarray | None
    smin: float
    smax: float
    reason: str | None = None


def _zero_if_none(re_P0):
    if re_P0 is None:
        return np.zeros((1, 1), dtype=complex)
    return np.asarray(re_P0, dtype=complex)


def _injective(M, tol: float):
    """(is_injective, smin, smax) by relative singular-value threshold."""
    M = np.asarray(M, dtype=complex)
    if M.shape[1] == 0:
        return True, 0.0, 0.0  # map from the zero space
    s = np.linalg.svd(M, compute_uv=False)
    smax = float(s[0])
    if M.shape[0] < M.shape[1]:
        return False, 0.0, smax  # wide matrices always have a kernel
    smin = float(s[-1])
    return smax > 0.0 and smin > tol * smax, smin, smax


def _as_extraction(V_or_ext, tol: float) -> VExtraction:
    if isinstance(V_or_ext, VExtraction):
        return V_or_ext
    if V_or_ext is None:
        return VExtraction(None, 0.0, 0.0, "no factor available")
    V = np.asarray(V_or_ext, dtype=complex)
    return VExtraction(V, 0.0, 0.0, None)


def sigma_form(W1, W2) -> np.ndarray:
    """W_B Sigma W_B^* = W1 W2^* + W2 W1^* (Hermitian by construction)."""
    W1 = np.asarray(W1, dtype=complex)
    W2 = np.asarray(W2, dtype=complex)
    return W1 @ W2.conj().T + W2 @ W1.conj().T


def kernel_energy_form(WB_hat, Q, tol: float = None):
    """(G, kernel_dim): G = K^* blockdiag(Q, -Q) K on ker WB_hat.

    The Phi_1 block comes first, matching the trace stacking order.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    WB_hat = np.asarray(WB_hat, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    if WB_hat.shape[1] != 2 * n:
        raise ShapeError("WB_hat width does not match blockdiag(Q, -Q)")
    K = numlin.kernel_basis(WB_hat, tol)
    B = np.zeros((2 * n, 2 * n), dtype=complex)
    B[:n, :n] = Q
    B[n:, n:] = -Q
    G = K.conj().T @ B @ K
    return G, K.shape[1]


def extract_v(W1, W2, tol: float = None) -> VExtraction:
    """Unique V with [W1 W2] = 0.5 (W1+W2) [I+V, I-V], when it exists.

    V = (W1+W2)^{-1} (W1-W2).  In finite dimensions invertibility of
    W1+W2 stands in for injectivity plus the range containment
    ran(W1-W2) <= ran(W1+W2).
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    W1 = np.asarray(W1, dtype=complex)
    W2 = np.asarray(W2, dtype=complex)
    T = W1 + W2
    if T.shape[0] != T.shape[1]:
        return VExtraction(None, 0.0, 0.0,
                           f"W1+W2 is {T.shape[0]}x{T.shape[1]}, not square")
    if T.shape[0] == 0:
        return VExtraction(np.zeros((0, 0), dtype=complex), 0.0, 0.0, None)
    s = np.linalg.svd(T, compute_uv=False)
    smin, smax = float(s[-1]), float(s[0])
    if smax == 0.0 or smin <= tol * smax:
        return VExtraction(None, smin, smax,
                           f"W1+W2 numerically singular (s_min={smin:.3e})")
    V = np.linalg.solve(T, W1 - W2)
    return VExtraction(V, smin, smax, None)


def range_containment(W1, W2, tol: float = None) -> ConditionResult:
    """RANBED: rank [W1+W2 | W1-W2] equals rank (W1+W2).

    Informational: with W1+W2 injective (square case) the containment is
    automatic, so it never gates the equivalence family.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    T = np.asarray(W1) + np.asarray(W2)
    D = np.asarray(W1) - np.asarray(W2)
    r_t = numlin.numerical_rank(T, tol)
    r_td = numlin.numerical_rank(np.hstack([T, D]), tol)
    return ConditionResult(
        "RANBED", True, r_td == r_t,
        {"rank_w1_plus_w2": float(r_t), "rank_augmented": float(r_td)},
    )


def _re_p0_nsd(re_P0, tol):
    rep = numlin.definiteness(re_P0, tol)
    return rep.is_nsd, float(rep.max_eig)


def _re_p0_zero(re_P0, tol):
    rep = numlin.definiteness(re_P0, tol)
    return rep.is_zero, float(max(abs(rep.min_eig), abs(rep.max_eig)))


def check_kernel_dissipativity(WB_hat, Q, re_P0=None, tol: float = None) -> ConditionResult:
    """T1.5: u^*Qu - y^*Qy <= 0 on ker WB_hat, plus Re P0 <= 0.

    This is the universal dissipativity test; it applies to any shape of
    WB_hat.  A trivial kernel passes vacuously.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    re_P0 = _zero_if_none(re_P0)
    G, kdim = kernel_energy_form(WB_hat, Q, tol)
    grep = numlin.definiteness(G, tol)
    p0_ok, p0_max = _re_p0_nsd(re_P0, tol)
    return ConditionResult(
        "T1.5", True, bool(grep.is_nsd and p0_ok),
        {
            "kernel_dim": float(kdim),
            "max_eig_kernel_form": grep.max_eig,
            "min_eig_kernel_form": grep.min_eig,
            "re_p0_max_eig": p0_max,
        },
    )


def check_injective_psd(W1, W2, re_P0=None, tol: float = None) -> ConditionResult:
    """T1.3: W1+W2 injective, W_B Sigma W_B^* >= 0 and Re P0 <= 0.

    Only applicable in the square case (k = N*d)."""
    if tol is None:
        tol = numlin.DEFAULT_TOL
    W1 = np.asarray(W1, dtype=complex)
    W2 = np.asarray(W2, dtype=complex)
    re_P0 = _zero_if_none(re_P0)
    if W1.shape[0] != W1.shape[1]:
        return ConditionResult(
            "T1.3", False, None,
            reason=f"needs k = N*d, got k={W1.shape[0]}, N*d={W1.shape[1]}")
    inj, smin, _ = _injective(W1 + W2, tol)
    srep = numlin.definiteness(sigma_form(W1, W2), tol)
    p0_ok, p0_max = _re_p0_nsd(re_P0, tol)
    return ConditionResult(
        "T1.3", True, bool(inj and srep.is_psd and p0_ok),
        {
            "smin_w1_plus_w2": smin,
            "min_eig_sigma_form": srep.min_eig,
            "max_eig_sigma_form": srep.max_eig,
            "re_p0_max_eig": p0_max,
        },
    )


def check_v_contraction(V_or_ext, re_P0=None, tol: float = None,
                        slack: float = 1e-8) -> ConditionResult:
    """T1.4: the factor V exists with ||V|| <= 1, and Re P0 <= 0.

    ||V|| is compared with absolute slack so that shift-type factors
    sitting exactly at norm 1 pass.  Not applicable when no V exists
    (the injectivity failure is then carried by T1.3)."""
    if tol is None:
        tol = numlin.DEFAULT_TOL
    re_P0 = _zero_if_none(re_P0)
    ext = _as_extraction(V_or_ext, tol)
    if ext.V is None:
        return ConditionResult("T1.4", False, None,
                               {"smin_w1_plus_w2": ext.smin}, reason=ext.reason)
    vnorm = numlin.operator_norm(ext.V)
    p0_ok, p0_max = _re_p0_nsd(re_P0, tol)
    return ConditionResult(
        "T1.4", True, bool(vnorm <= 1.0 + slack and p0_ok),
        {"v_norm": vnorm, "re_p0_max_eig": p0_max},
    )


def _surjective(WB_hat, tol):
    WB_hat = np.asarray(WB_hat, dtype=complex)
    if WB_hat.shape[0] == 0:
        return True, 0.0  # no conditions: trivially onto the zero space
    s = np.linalg.svd(WB_hat, compute_uv=False)
    return s[0] > 0.0 and float(s[-1]) > tol * float(s[0]), float(s[-1])


def check_surjective_psd(WB_hat, W1, W2, re_P0=None, tol: float = None) -> ConditionResult:
    """C2.6: WB_hat full row rank, W_B Sigma W_B^* >= 0 and Re P0 <= 0."""
    if tol is None:
        tol = numlin.DEFAULT_TOL
    WB_hat = np.asarray(WB_hat, dtype=complex)
    re_P0 = _zero_if_none(re_P0)
    k, width = WB_hat.shape
    if k != width // 2:
        return ConditionResult("C2.6", False, None,
                               reason=f"needs k = N*d, got k={k}, N*d={width // 2}")
    surj, smin_wb = _surjective(WB_hat, tol)
    srep = numlin.definiteness(sigma_form(W1, W2), tol)
    p0_ok, p0_max = _re_p0_nsd(re_P0, tol)
    return ConditionResult(
        "C2.6", True, bool(surj and srep.is_psd and p0_ok),
        {
            "smin_wb_hat": smin_wb,
            "min_eig_sigma_form": srep.min_eig,
            "re_p0_max_eig": p0_max,
        },
    )


def check_surjective_v(WB_hat, V_or_ext, re_P0=None, tol: float = None,
                       slack: float = 1e-8) -> ConditionResult:
    """C2.7: WB_hat full row rank, V exists with ||V|| <= 1, Re P0 <= 0.

    When W1+W2 is singular no factorization with surjective W_B can
    exist, so the condition is reported as failing."""
    if tol is None:
        tol = numlin.DEFAULT_TOL
    WB_hat = np.asarray(WB_hat, dtype=complex)
    re_P0 = _zero_if_none(re_P0)
    ext = _as_extraction(V_or_ext, tol)
    k, width = WB_hat.shape
    if k != width // 2:
        return ConditionResult("C2.7", False, None,
                               reason=f"needs k = N*d, got k={k}, N*d={width // 2}")
    surj, smin_wb = _surjective(WB_hat, tol)
    p0_ok, p0_max = _re_p0_nsd(re_P0, tol)
    if ext.V is None:
        return ConditionResult("C2.7", True, False,
                               {"smin_wb_hat": smin_wb, "re_p0_max_eig": p0_max,
                                "smin_w1_plus_w2": ext.smin},
                               reason=ext.reason)
    vnorm = numlin.operator_norm(ext.V)
    return ConditionResult(
        "C2.7", True, bool(surj and vnorm <= 1.0 + slack and p0_ok),
        {"smin_wb_hat": smin_wb, "v_norm": vnorm, "re_p0_max_eig": p0_max},
    )


def isometry_defect(V) -> float:
    """|| I - V V^* ||: zero iff V is a co-isometry (unitary when square)."""
    V = np.asarray(V, dtype=complex)
    n = V.shape[0]
    if n == 0:
        return 0.0
    return float(np.linalg.norm(np.eye(n) - V @ V.conj().T, 2))


def check_unitary_conditions(WB_hat, Q, W1, W2, P0=None, tol: float = None,
                             slack: float = 1e-8, V_or_ext=None):
    """Unitary-group family: T3.5, T3.3, T3.4, C3.6, C3.7 (in that order).

    T3.5 tests the kernel energy form for exact vanishing and applies to
    any shape; the others need the square case.  The V-based conditions
    test the factor for being unitary (isometry defect ~ 0): once both
    injectivity requirements hold this is what the norm-one condition
    amounts to, and it is the only reading under which the family stays
    equivalent on truncated shift operators.
    """
    if tol is None:
        tol = numlin.DEFAULT_TOL
    WB_hat = np.asarray(WB_hat, dtype=complex)
    W1 = np.asarray(W1, dtype=complex)
    W2 = np.asarray(W2, dtype=complex)
    re_P0 = numlin.hermitian_part(_zero_if_none(P0))
    ext = extract_v(W1, W2, tol) if V_or_ext is None else _as_extraction(V_or_ext, tol)
    k = WB_hat.shape[0]
    nd = WB_hat.shape[1] // 2
    square = k == nd
    not_square = None if square else f"needs k = N*d, got k={k}, N*d={nd}"
    p0_zero, p0_norm = _re_p0_zero(re_P0, tol)
    results = []

    G, kdim = kernel_energy_form(WB_hat, Q, tol)
    grep = numlin.definiteness(G, tol)
    results.append(ConditionResult(
        "T3.5", True, bool(grep.is_zero and p0_zero),
        {
            "kernel_dim": float(kdim),
            "norm_kernel_form": max(abs(grep.min_eig), abs(grep.max_eig)),
            "re_p0_norm": p0_norm,
        },
    ))

    inj_p, smin_p, _ = _injective(W1 + W2, tol)
    inj_m, smin_m, _ = _injective(W2 - W1, tol)
    srep = numlin.definiteness(sigma_form(W1, W2), tol)
    snorm = max(abs(srep.min_eig), abs(srep.max_eig))
    results.append(ConditionResult(
        "T3.3", square,
        bool(inj_p and inj_m and srep.is_zero and p0_zero) if square else None,
        {
            "smin_w1_plus_w2": smin_p,
            "smin_w2_minus_w1": smin_m,
            "norm_sigma_form": snorm,
            "re_p0_norm": p0_norm,
        },
        reason=not_square,
    ))

    surj, smin_wb = _surjective(WB_hat, tol)

    if ext.V is None:
        results.append(ConditionResult(
            "T3.4", False, None, {"smin_w1_plus_w2": ext.smin},
            reason=ext.reason if square else not_square))
    else:
        vnorm = numlin.operator_norm(ext.V)
        defect = isometry_defect(ext.V)
        thr = max(slack, tol * max(1.0, vnorm * vnorm))
        results.append(ConditionResult(
            "T3.4", square,
            bool(inj_p and inj_m and defect <= thr and p0_zero) if square else None,
            {
                "v_norm": vnorm,
                "isometry_defect": defect,
                "smin_w2_minus_w1": smin_m,
                "re_p0_norm": p0_norm,
            },
            reason=not_square,
        ))

    results.append(ConditionResult(
        "C3.6", square,
        bool(surj and srep.is_zero and p0_zero) if square else None,
        {"smin_wb_hat": smin_wb, "norm_sigma_form": snorm, "re_p0_norm": p0_norm},
        reason=not_square,
    ))

    if ext.V is None:
        results.append(ConditionResult(
            "C3.7", square, False if square else None,
            {"smin_wb_hat": smin_wb, "smin_w1_plus_w2": ext.smin},
            reason=ext.reason if square else not_square))
    else:
        vnorm = numlin.operator_norm(ext.V)
        defect = isometry_defect(ext.V)
        thr = max(slack, tol * max(1.0, vnorm * vnorm))
        results.append(ConditionResult(
            "C3.7", square,
            bool(surj and defect <= thr and p0_zero) if square else None,
            {
                "smin_wb_hat": smin_wb,
                "v_norm": vnorm,
                "isometry_defect": defect,
                "re_p0_norm": p0_norm,
            },
            reason=not_square,
        ))
    return results


CONTRACTION_FAMILY = ("T1.3", "T1.4", "T1.5", "C2.6", "C2.7")
UNITARY_FAMILY = ("T3.3", "T3.4", "T3.5", "C3.6", "C3.7")


def analyze_interval(sys: PortHamiltonianSystem) -> Verdict:
    """Evaluate every applicable condition and combine them into a verdict.

    For k = N*d the contraction and unitary families are each checked for
    internal agreement (disagreement sets the discrepancy flag).  For
    k != N*d only the kernel tests apply: the consensus is then
    dissipative_only or not_contraction and unitarity stays undetermined
    unless refuted.  Verdicts depend on WB_hat only through its kernel,
    so they are invariant under row scaling M @ WB_hat, M invertible.
    """
    if sys.interval != UNIT_INTERVAL:
        raise ShapeError("analyze_interval needs a unit_interval system")
    tol = sys.tol.check
    slack = sys.tol.v_norm_slack
    bop = derive_boundary_operator(sys)
    Q = bop.Q
    re_P0 = sys.re_P0()
    ext = extract_v(bop.W1, bop.W2, sys.tol.tau_rank)

    warnings = []
    k = sys.n_conditions
    if k and numlin.numerical_rank(sys.WB_hat, tol) < k:
        warnings.append("WB_hat has linearly dependent rows; kernel tests are "
                        "unaffected but rank-based conditions will fail")

    conditions = [range_containment(bop.W1, bop.W2, tol)]
    conditions.append(check_injective_psd(bop.W1, bop.W2, re_P0, tol))
    conditions.append(check_v_contraction(ext, re_P0, tol, slack))
    conditions.append(check_kernel_dissipativity(sys.WB_hat, Q, re_P0, tol))
    conditions.append(check_surjective_psd(sys.WB_hat, bop.W1, bop.W2, re_P0, tol))
    conditions.append(check_surjective_v(sys.WB_hat, ext, re_P0, tol, slack))
    conditions.extend(check_unitary_conditions(sys.WB_hat, Q, bop.W1, bop.W2,
                                               sys.P0, tol, slack, V_or_ext=ext))

    by_id = {c.condition_id: c for c in conditions}
    square = k == sys.nd

    contraction_value, disc_c = family_outcome([by_id[i] for i in CONTRACTION_FAMILY])
    unitary_value, disc_u = family_outcome([by_id[i] for i in UNITARY_FAMILY])
    discrepancy = disc_c or disc_u

    if square:
        if contraction_value is True:
            consensus = CONTRACTION
        elif contraction_value is False:
            consensus = NOT_CONTRACTION
        else:
            consensus = UNDETERMINED
        unitary = unitary_value if not disc_u else None
    else:
        t15 = by_id["T1.5"]
        consensus = DISSIPATIVE_ONLY if t15.holds else NOT_CONTRACTION
        unitary = None if by_id["T3.5"].holds else False

    # Unitary certification implies contraction; disagreement is a bug signal.
    if unitary is True and consensus != CONTRACTION:
        discrepancy = True
        unitary = None
    if square and consensus == NOT_CONTRACTION and unitary is None:
        unitary = False

    return Verdict(
        conditions=tuple(conditions),
        consensus=consensus,
        unitary=unitary,
        discrepancy=discrepancy,
        warnings=tuple(warnings),
    )
