"""phwell: well-posedness checks for 1-D port-Hamiltonian PDE systems.

Decides whether the generator of dx/dt = sum_k P_k d^k/dz^k (H x) with
boundary condition WB_hat Phi(Hx) = 0 produces non-increasing (contraction)
or exactly conserved (unitary group) energy, by evaluating every equivalent
algebraic criterion independently and cross-checking them, with a
quadrature dissipativity oracle and an energy-monitoring simulator as
independent evidence.
"""

from .cli import analyze
from .config import parse_config, system_from_dict, system_to_dict
from .errors import (
    BoundaryClosureSingular,
    CFLViolation,
    GridTooCoarse,
    HNotCoercive,
    NotHermitian,
    OrderError,
    ParseError,
    PhwellError,
    ShapeError,
    SingularP1,
    SingularPN,
    SingularQ,
    StructureError,
    ValidationError,
)
from .halfline import (
    analyze_halfline,
    check_contraction_halfline,
    check_unitary_halfline,
    decompose_P1,
    factorize_boundary,
    solve_resolvent_halfline,
)
from .interval import analyze_interval, extract_v
from .model import (
    HALF_LINE,
    UNIT_INTERVAL,
    BoundaryOperator,
    BoundaryTrace,
    HamiltonianDensity,
    PortHamiltonianSystem,
    PortVariables,
    Tolerances,
    boundary_trace,
    build_q,
    port_variables,
    split_boundary_operator,
    validate_system,
)
from .simulator import (
    EnergyTrace,
    SmoothFunction,
    boundary_interpolant,
    dissipativity_oracle,
    quadrature_rayleigh,
    simulate,
    smooth_bump,
)
from .verdict import ConditionResult, Verdict

__version__ = "0.1.0"

__all__ = [
    "analyze",
    "analyze_halfline",
    "analyze_interval",
    "boundary_interpolant",
    "boundary_trace",
    "build_q",
    "check_contraction_halfline",
    "check_unitary_halfline",
    "decompose_P1",
    "dissipativity_oracle",
    "extract_v",
    "factorize_boundary",
    "parse_config",
    "port_variables",
    "quadrature_rayleigh",
    "simulate",
    "smooth_bump",
    "solve_resolvent_halfline",
    "split_boundary_operator",
    "system_from_dict",
    "system_to_dict",
    "validate_system",
    "BoundaryOperator",
    "BoundaryTrace",
    "ConditionResult",
    "EnergyTrace",
    "HamiltonianDensity",
    "PortHamiltonianSystem",
    "PortVariables",
    "SmoothFunction",
    "Tolerances",
    "Verdict",
    "HALF_LINE",
    "UNIT_INTERVAL",
]
