"""Exception types shared across the toolkit."""

from __future__ import annotations


class PlanEvalError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# Parsing / grounding
# ---------------------------------------------------------------------------


class PddlSyntaxError(PlanEvalError):
    """Malformed PDDL input; carries position and the expected token."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnsupportedFeature(PlanEvalError):
    """A PDDL construct outside the positive-precondition STRIPS + typing subset."""

    def __init__(self, construct: str, detail: str = ""):
        self.construct = construct
        suffix = f": {detail}" if detail else ""
        super().__init__(f"unsupported PDDL construct '{construct}'{suffix}")


class UndeclaredSymbol(PlanEvalError):
    """An object, predicate or type that is not declared in the domain/problem."""

    def __init__(self, kind: str, name: str):
        self.kind = kind
        self.name = name
        super().__init__(f"undeclared {kind} '{name}'")


class MalformedLine(PlanEvalError):
    """A plan line with no parsable token at all."""

    def __init__(self, line_number: int, text: str):
        self.line_number = line_number
        self.text = text
        super().__init__(f"no parsable token on plan line {line_number}: {text!r}")


class ArityMismatch(PlanEvalError):
    pass


class TypeMismatch(PlanEvalError):
    pass


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


class UnresolvableAction(PlanEvalError):
    """The action never resolved against the domain, so it cannot be executed."""


class NotApplicable(PlanEvalError):
    """Preconditions unmet in the state the action was applied to."""

    def __init__(self, action: str, unmet: tuple):
        self.action = action
        self.unmet = unmet
        missing = " ".join(sorted("(%s)" % " ".join(a) for a in unmet))
        super().__init__(f"action {action} not applicable, unmet: {missing}")


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------


class PlanningUnsolvable(PlanEvalError):
    """The goal is unreachable from the initial state."""


class PlanningTimeout(PlanEvalError):
    """Search exceeded its time budget; carries the best incumbent, if any."""

    def __init__(self, message: str, incumbent=None):
        self.incumbent = incumbent
        super().__init__(message)


# ---------------------------------------------------------------------------
# Scoring / transformation / recovery
# ---------------------------------------------------------------------------


class ZeroLengthGroundTruth(PlanEvalError):
    """Length penalties are undefined for an empty ground-truth plan."""


class NonBijectiveMapping(PlanEvalError):
    """Parameter remapping must be a permutation of the plan's objects."""


class SearchBudgetExceeded(PlanEvalError):
    """Variant enumeration hit the configured cap; carries the best found so far."""

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


class RecoveryFailed(PlanEvalError):
    """Replanning for the complementary plan failed."""

    def __init__(self, cause: Exception):
        self.cause = cause
        super().__init__(f"recovery replanning failed: {cause}")


# ---------------------------------------------------------------------------
# Pipeline driver
# ---------------------------------------------------------------------------


class InstanceError(PlanEvalError):
    """A pipeline stage failed for one instance; names the stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


class ManifestError(PlanEvalError):
    """A malformed manifest row."""

    def __init__(self, row: int, cause: str):
        self.row = row
        super().__init__(f"manifest row {row}: {cause}")


class ConfigError(PlanEvalError):
    pass
