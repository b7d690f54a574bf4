"""Condition results and the aggregate verdict shared by both checkers.

The JSON schema is fixed: one object per condition id carrying
{applicable, holds, diagnostics, reason}, plus consensus, unitary,
discrepancy and warnings at the top level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

CONTRACTION = "contraction"
NOT_CONTRACTION = "not_contraction"
DISSIPATIVE_ONLY = "dissipative_only"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of one algebraic condition.

    holds is None exactly when the condition is not applicable; reason
    says why it was skipped.  Diagnostics are named scalars (floats).
    """

    condition_id: str
    applicable: bool
    holds: bool | None
    diagnostics: dict = field(default_factory=dict)
    reason: str | None = None

    def to_json(self):
        diags = {}
        for k, v in sorted(self.diagnostics.items()):
            diags[k] = float(v) if isinstance(v, (int, float)) else v
        return {
            "applicable": self.applicable,
            "holds": self.holds,
            "diagnostics": diags,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class Verdict:
    """Per-condition results plus the consensus of the equivalent family.

    consensus: contraction | not_contraction | dissipative_only | undetermined
    unitary:   True / False / None (None = conservative but not certifiable)
    discrepancy: True iff two applicable conditions that are provably
    equivalent disagree -- always a bug signal, never a modeling outcome.
    """

    conditions: tuple
    consensus: str
    unitary: bool | None
    discrepancy: bool
    warnings: tuple = ()

    def __getitem__(self, condition_id: str) -> ConditionResult:
        for c in self.conditions:
            if c.condition_id == condition_id:
                return c
        raise KeyError(condition_id)

    def ids(self):
        return [c.condition_id for c in self.conditions]

    @property
    def is_contraction(self) -> bool:
        return self.consensus == CONTRACTION

    def to_json(self):
        return {
            "conditions": {c.condition_id: c.to_json() for c in self.conditions},
            "consensus": self.consensus,
            "unitary": self.unitary,
            "discrepancy": self.discrepancy,
            "warnings": list(self.warnings),
        }


def family_outcome(results):
    """Combine the applicable members of one equivalence family.

    Returns (value, discrepancy): value True/False when all applicable
    members agree, None when none is applicable or they disagree
    (disagreement also sets the flag).
    """
    vals = [r.holds for r in results if r.applicable]
    if not vals:
        return None, False
    if all(vals):
        return True, False
    if not any(vals):
        return False, False
    return None, True
