"""System data model, structural validation and derived boundary algebra.

A system is the tuple (field, interval, N, d, P_0..P_N, H, WB_hat) for

    dx/dt = sum_k P_k d^k/dz^k (H(z) x),    WB_hat * Phi(H x) = 0,

with P_k^* = (-1)^{k+1} P_k for k >= 1, P_N invertible, and H(z) Hermitian
positive definite with uniform bounds.  Everything is stored in complex
arithmetic; real-field systems are embedded (verdicts are field independent).

Boundary traces are stacked z=1 block first: Phi = [Phi_1; Phi_0].
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import numlin
from .errors import (
    HNotCoercive,
    OrderError,
    ShapeError,
    SingularP1,
    SingularPN,
    SingularQ,
    StructureError,
)

UNIT_INTERVAL = "unit_interval"
HALF_LINE = "half_line"

V_NORM_SLACK = 1e-8  # absolute slack for ||V|| <= 1 tests; shifts sit exactly at 1


def default_tolerance() -> float:
    """Base relative tolerance; the PHWELL_TOL env var overrides the default."""
    raw = os.environ.get("PHWELL_TOL")
    if raw is None:
        return 1e-10
    return float(raw)


@dataclass(frozen=True)
class Tolerances:
    """Relative thresholds for structure, rank and definiteness decisions."""

    tau_struct: float = dc_field(default_factory=default_tolerance)
    tau_rank: float = dc_field(default_factory=default_tolerance)
    tau_pd: float = dc_field(default_factory=default_tolerance)
    check: float = dc_field(default_factory=default_tolerance)
    v_norm_slack: float = V_NORM_SLACK

    def to_dict(self):
        return {
            "tau_struct": self.tau_struct,
            "tau_rank": self.tau_rank,
            "tau_pd": self.tau_pd,
            "check": self.check,
            "v_norm_slack": self.v_norm_slack,
        }


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HamiltonianDensity:
    """Hamiltonian density H(z): constant, piecewise-constant, or grid-sampled.

    kind 'constant'            -- one d x d matrix
    kind 'piecewise_constant'  -- strictly increasing interior breakpoints and
                                  len(breakpoints)+1 cell matrices
    kind 'grid'                -- uniform samples on [0, 1] incl. endpoints
    """

    kind: str
    matrices: np.ndarray  # (m, d, d)
    breakpoints: np.ndarray | None = None  # (m-1,) for piecewise_constant

    @staticmethod
    def constant(H) -> "HamiltonianDensity":
        H = np.asarray(H, dtype=complex)
        return HamiltonianDensity("constant", _freeze(H[None, :, :]))

    @staticmethod
    def piecewise(breakpoints, matrices) -> "HamiltonianDensity":
        b = np.asarray(breakpoints, dtype=float)
        m = np.asarray(matrices, dtype=complex)
        if m.shape[0] != b.size + 1:
            raise ShapeError("piecewise H needs len(breakpoints)+1 matrices", path="H")
        if b.size and not np.all(np.diff(b) > 0):
            raise ShapeError("H breakpoints must be strictly increasing", path="H")
        return HamiltonianDensity("piecewise_constant", _freeze(m), _freeze(b))

    @staticmethod
    def grid(matrices) -> "HamiltonianDensity":
        m = np.asarray(matrices, dtype=complex)
        if m.shape[0] < 2:
            raise ShapeError("grid H needs at least 2 samples", path="H")
        return HamiltonianDensity("grid", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def is_identity(self) -> bool:
        d = self.dim
        return all(np.allclose(m, np.eye(d)) for m in self.matrices)

    def samples(self) -> np.ndarray:
        """All stored samples, shape (m, d, d)."""
        return self.matrices

    def at(self, zeta: float) -> np.ndarray:
        """Evaluate H at a point (grid kind interpolates piecewise linearly)."""
        if self.kind == "constant":
            return self.matrices[0]
        if self.kind == "piecewise_constant":
            idx = int(np.searchsorted(self.breakpoints, zeta, side="right"))
            return self.matrices[idx]
        n = self.matrices.shape[0]
        t = np.clip(zeta, 0.0, 1.0) * (n - 1)
        i = min(int(t), n - 2)
        w = t - i
        return (1.0 - w) * self.matrices[i] + w * self.matrices[i + 1]

    def cell_values(self, centers) -> np.ndarray:
        """H evaluated at an array of cell centers, shape (len(centers), d, d)."""
        return np.stack([self.at(float(z)) for z in np.asarray(centers)])

    def to_json(self):
        def mat(m):
            return [[_num_to_json(x) for x in row] for row in m]

        if self.kind == "constant":
            return {"kind": "constant", "matrix": mat(self.matrices[0])}
        if self.kind == "piecewise_constant":
            return {
                "kind": "piecewise_constant",
                "breakpoints": [float(b) for b in self.breakpoints],
                "matrices": [mat(m) for m in self.matrices],
            }
        return {"kind": "grid", "matrices": [mat(m) for m in self.matrices]}


def _num_to_json(x):
    x = complex(x)
    if x.imag == 0.0:
        return float(x.real)
    return [float(x.real), float(x.imag)]


@dataclass(frozen=True)
class PortHamiltonianSystem:
    """A validated system; construct through validate_system()."""

    field: str  # 'real' | 'complex'
    interval: str  # UNIT_INTERVAL | HALF_LINE
    order_N: int
    dim_d: int
    P: tuple  # N+1 frozen (d, d) complex arrays
    H: HamiltonianDensity
    WB_hat: np.ndarray  # (k, 2Nd) or (k, d)
    tol: Tolerances
    h_min_eig: float  # measured m = min over samples of lambda_min(H)
    h_max_eig: float  # measured M

    @property
    def nd(self) -> int:
        return self.order_N * self.dim_d

    @property
    def n_conditions(self) -> int:
        return self.WB_hat.shape[0]

    @property
    def P0(self) -> np.ndarray:
        return self.P[0]

    def re_P0(self) -> np.ndarray:
        return numlin.hermitian_part(self.P0)

    def with_WB(self, WB_hat) -> "PortHamiltonianSystem":
        """Same system with a replacement boundary operator (revalidated shape)."""
        WB_hat = np.asarray(WB_hat, dtype=complex)
        width = 2 * self.nd if self.interval == UNIT_INTERVAL else self.dim_d
        if WB_hat.ndim != 2 or WB_hat.shape[1] != width:
            raise ShapeError(
                f"WB_hat must have width {width}, got {WB_hat.shape}", path="WB_hat"
            )
        return PortHamiltonianSystem(
            self.field, self.interval, self.order_N, self.dim_d, self.P,
            self.H, _freeze(WB_hat), self.tol, self.h_min_eig, self.h_max_eig,
        )


@dataclass(frozen=True)
class BoundaryTrace:
    """Traces of x and its derivatives up to order N-1; z=1 block first."""

    phi1: np.ndarray  # (N*d,)
    phi0: np.ndarray  # (N*d,)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.phi1, self.phi0])


@dataclass(frozen=True)
class PortVariables:
    """Boundary flow / effort pair (f, e) = (1/sqrt2) [Q -Q; I I] Phi."""

    f_boundary: np.ndarray
    e_boundary: np.ndarray

    def pairing(self) -> float:
        """2 Re <f, e>, the instantaneous boundary power."""
        return float(2.0 * np.real(np.vdot(self.f_boundary, self.e_boundary)))


@dataclass(frozen=True)
class BoundaryOperator:
    """WB_hat together with Q, the split (W1, W2) and, when it exists, V.

    V = (W1+W2)^{-1} (W1-W2) exists iff W1+W2 is invertible; V is None
    otherwise and `v_reason` says why.
    """

    WB_hat: np.ndarray
    Q: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    V: np.ndarray | None
    v_reason: str | None = None


def validate_system(raw: dict) -> PortHamiltonianSystem:
    """Validate a raw description and return an immutable system.

    raw keys: field, interval, N, d, P (list of N+1 matrices), H
    (HamiltonianDensity or matrix), WB_hat, optional tolerances
    (Tolerances or dict).  Raises ShapeError / StructureError /
    SingularPN / SingularP1 / HNotCoercive.
    """
    field = raw.get("field", "complex")
    if field not in ("real", "complex"):
        raise StructureError(f"field must be 'real' or 'complex', got {field!r}", path="field")
    interval = raw.get("interval", UNIT_INTERVAL)
    if interval not in (UNIT_INTERVAL, HALF_LINE):
        raise StructureError(f"unknown interval kind {interval!r}", path="interval")

    N = int(raw["N"])
    d = int(raw["d"])
    if N < 1 or d < 1:
        raise ShapeError("N and d must be positive integers")

    tol = raw.get("tolerances") or Tolerances()
    if isinstance(tol, dict):
        tol = Tolerances(**{k: float(v) for k, v in tol.items()})

    P_raw = raw["P"]
    if len(P_raw) != N + 1:
        raise ShapeError(f"P must list N+1 = {N + 1} matrices, got {len(P_raw)}", path="P")
    P = []
    for k, Pk in enumerate(P_raw):
        Pk = np.asarray(Pk, dtype=complex)
        if Pk.shape != (d, d):
            raise ShapeError(f"P[{k}] must be {d}x{d}, got {Pk.shape}", path=f"P[{k}]")
        P.append(Pk)

    if field == "real":
        for k, Pk in enumerate(P):
            if np.any(np.abs(Pk.imag) > 0):
                raise StructureError(f"real-field system has complex P[{k}]", path=f"P[{k}]")

    # P_k^* = (-1)^{k+1} P_k, k = 1..N
    for k in range(1, N + 1):
        Pk = P[k]
        scale = max(1.0, numlin.operator_norm(Pk))
        dev = np.linalg.norm(Pk.conj().T - ((-1.0) ** (k + 1)) * Pk, 2)
        if dev > tol.tau_struct * scale:
            kind = "Hermitian" if k % 2 == 1 else "skew-Hermitian"
            raise StructureError(
                f"P[{k}] must be {kind}: deviation {dev:.3e}", path=f"P[{k}]"
            )

    # P_N invertible
    PN = P[N]
    s = np.linalg.svd(PN, compute_uv=False)
    if s[0] == 0.0 or s[-1] < tol.tau_rank * s[0]:
        raise SingularPN(f"P[{N}] is numerically singular (s_min={s[-1]:.3e})", path=f"P[{N}]")

    # H Hermitian positive definite at every sample
    H = raw["H"]
    if not isinstance(H, HamiltonianDensity):
        H = HamiltonianDensity.constant(np.asarray(H, dtype=complex))
    if H.dim != d:
        raise ShapeError(f"H samples must be {d}x{d}, got {H.dim}x{H.dim}", path="H")
    m_eig, M_eig = np.inf, -np.inf
    for i, Hs in enumerate(H.samples()):
        dev = np.linalg.norm(Hs - Hs.conj().T, 2)
        if dev > tol.tau_struct * max(1.0, np.linalg.norm(Hs, 2)):
            raise StructureError(f"H sample {i} is not Hermitian", path="H")
        w = np.linalg.eigvalsh(numlin.hermitian_part(Hs))
        if w[0] <= tol.tau_pd * max(1.0, w[-1]):
            raise HNotCoercive(
                f"H sample {i} has min eigenvalue {w[0]:.3e}", path="H"
            )
        m_eig = min(m_eig, float(w[0]))
        M_eig = max(M_eig, float(w[-1]))

    # boundary operator width
    WB = np.asarray(raw["WB_hat"], dtype=complex)
    if WB.ndim != 2:
        raise ShapeError("WB_hat must be a matrix", path="WB_hat")
    width = 2 * N * d if interval == UNIT_INTERVAL else d
    if WB.shape[1] != width:
        raise ShapeError(
            f"WB_hat must have width {width} for this system, got {WB.shape[1]}",
            path="WB_hat",
        )
    if field == "real" and np.any(np.abs(WB.imag) > 0):
        raise StructureError("real-field system has complex WB_hat", path="WB_hat")

    if interval == HALF_LINE:
        if N != 1:
            raise StructureError("half_line systems must have N = 1", path="N")
        n_pos, n_zero, n_neg = numlin.inertia(P[1], tol.tau_rank)
        if n_zero > 0:
            raise SingularP1(
                f"P[1] has {n_zero} eigenvalue(s) at zero; half-line theory needs none",
                path="P[1]",
            )

    return PortHamiltonianSystem(
        field=field,
        interval=interval,
        order_N=N,
        dim_d=d,
        P=tuple(_freeze(Pk) for Pk in P),
        H=H,
        WB_hat=_freeze(WB),
        tol=tol,
        h_min_eig=m_eig,
        h_max_eig=M_eig,
    )


def build_q(P1N) -> np.ndarray:
    """Block matrix Q from [P_1, ..., P_N]: block (i, j) = (-1)^{i-1} P_{i+j-1}
    when i + j <= N + 1 and zero otherwise (1-based block indices).

    P_0 never enters.  The result is Hermitian and invertible
    (anti-triangular with +-P_N blocks on the anti-diagonal).
    """
    P1N = [np.asarray(Pk, dtype=complex) for Pk in P1N]
    N = len(P1N)
    d = P1N[-1].shape[0]
    Q = np.zeros((N * d, N * d), dtype=complex)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i + j <= N + 1:
                blk = ((-1.0) ** (i - 1)) * P1N[i + j - 2]
                Q[(i - 1) * d : i * d, (j - 1) * d : j * d] = blk
    return Q


def build_q_for_system(sys: PortHamiltonianSystem) -> np.ndarray:
    """Q of a validated system (uses P_1..P_N)."""
    return build_q(list(sys.P[1:]))


def r_ext(Q) -> np.ndarray:
    """The invertible port-variable map (1/sqrt2) [Q -Q; I I]."""
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    eye = np.eye(n)
    return np.block([[Q, -Q], [eye, eye]]) / np.sqrt(2.0)


def r_ext_inv(Q) -> np.ndarray:
    """Closed-form inverse of r_ext: (1/sqrt2) [Q^{-1} I; -Q^{-1} I]."""
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    Qi = np.linalg.inv(Q)
    eye = np.eye(n)
    return np.block([[Qi, eye], [-Qi, eye]]) / np.sqrt(2.0)


def split_boundary_operator(WB_hat, Q, tol: float | None = None):
    """Split WB_hat into (W1, W2) with [W1 W2] = WB_hat [Q -Q; I I]^{-1}.

    Using the closed-form inverse 0.5 [Q^{-1} I; -Q^{-1} I] this is
    W1 = 0.5 (Wh1 - Wh2) Q^{-1} and W2 = 0.5 (Wh1 + Wh2) for
    WB_hat = [Wh1 Wh2].  Reconstruction [W1 W2][Q -Q; I I] = WB_hat holds
    by construction.
    """
    WB_hat = np.asarray(WB_hat, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    if WB_hat.shape[1] != 2 * n:
        raise ShapeError(
            f"WB_hat width {WB_hat.shape[1]} does not match 2*{n}", path="WB_hat"
        )
    if tol is None:
        tol = default_tolerance()
    s = np.linalg.svd(Q, compute_uv=False)
    if s[0] == 0.0 or s[-1] < tol * s[0]:
        raise SingularQ("Q is numerically singular")  # defensive, cannot occur
    Wh1, Wh2 = WB_hat[:, :n], WB_hat[:, n:]
    Qi = np.linalg.inv(Q)
    W1 = 0.5 * (Wh1 - Wh2) @ Qi
    W2 = 0.5 * (Wh1 + Wh2)
    return W1, W2


def derive_boundary_operator(sys: PortHamiltonianSystem) -> BoundaryOperator:
    """Q, (W1, W2) and the contraction factor V for a unit-interval system."""
    Q = build_q_for_system(sys)
    W1, W2 = split_boundary_operator(sys.WB_hat, Q, sys.tol.tau_rank)
    V = None
    reason = None
    T = W1 + W2
    if T.shape[0] != T.shape[1]:
        reason = f"W1+W2 is {T.shape[0]}x{T.shape[1]}, not square"
    else:
        s = np.linalg.svd(T, compute_uv=False) if T.size else np.array([0.0])
        if s[0] == 0.0 or s[-1] < sys.tol.tau_rank * max(1.0, s[0]):
            reason = f"W1+W2 numerically singular (s_min={s[-1]:.3e})"
        else:
            V = np.linalg.solve(T, W1 - W2)
    return BoundaryOperator(WB_hat=sys.WB_hat, Q=_freeze(Q), W1=_freeze(W1),
                            W2=_freeze(W2), V=None if V is None else _freeze(V),
                            v_reason=reason)


def boundary_trace(x, N: int, d: int) -> BoundaryTrace:
    """Stack derivative traces of x at z=1 and z=0 up to order N-1.

    x must expose derivative_at(zeta, order) returning a d-vector;
    SmoothFunction from the simulator module qualifies.  Raises OrderError
    when x declares (via max_order) fewer than N-1 derivatives.
    """
    max_order = getattr(x, "max_order", None)
    if max_order is not None and max_order < N - 1:
        raise OrderError(
            f"function provides derivatives up to order {max_order}, need {N - 1}"
        )
    phi1 = np.zeros(N * d, dtype=complex)
    phi0 = np.zeros(N * d, dtype=complex)
    for j in range(N):
        v1 = np.asarray(x.derivative_at(1.0, j), dtype=complex).reshape(-1)
        v0 = np.asarray(x.derivative_at(0.0, j), dtype=complex).reshape(-1)
        if v1.size != d or v0.size != d:
            raise ShapeError(f"trace values must have dimension {d}")
        phi1[j * d : (j + 1) * d] = v1
        phi0[j * d : (j + 1) * d] = v0
    return BoundaryTrace(phi1=_freeze(phi1), phi0=_freeze(phi0))


def port_variables(trace: BoundaryTrace, Q) -> PortVariables:
    """f = (1/sqrt2) Q (Phi_1 - Phi_0), e = (1/sqrt2) (Phi_1 + Phi_0)."""
    Q = np.asarray(Q, dtype=complex)
    f = Q @ (trace.phi1 - trace.phi0) / np.sqrt(2.0)
    e = (trace.phi1 + trace.phi0) / np.sqrt(2.0)
    return PortVariables(f_boundary=_freeze(f), e_boundary=_freeze(e))
