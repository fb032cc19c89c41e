"""Exception hierarchy shared across the package."""


class ShelfPlanError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(ShelfPlanError):
    """A document does not conform to its file schema."""


class ValidationError(ShelfPlanError):
    """A scene violates one or more structural invariants."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


class GenerationExhausted(ShelfPlanError):
    """The scene generator ran out of placement attempts."""


class MissingBox(ShelfPlanError):
    """A referenced box id is not present in the scene or graph."""


class EmptyScene(ShelfPlanError):
    """An operation that needs at least one box got an empty scene."""


class EmptyCluster(ShelfPlanError):
    """Target estimation was asked to run on an empty point set."""


class CyclicDependencies(ShelfPlanError):
    """The dependency graph contains a cycle (engine contract violation)."""


class PlanDictionaryMismatch(ShelfPlanError):
    """An extraction plan is inconsistent with the dependency dictionary."""


class InvalidK(ShelfPlanError):
    """Support-candidate count k must be at least 1."""


class SessionNotFound(ShelfPlanError):
    """No session with the given id exists."""


class NoPlan(ShelfPlanError):
    """The session has no stored extraction plan."""


class PlanExhausted(ShelfPlanError):
    """Every step of the stored plan has already been executed."""


class ReplayDivergence(ShelfPlanError):
    """Re-executing an event log produced a different outcome than recorded."""
