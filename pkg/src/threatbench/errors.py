"""Exception hierarchy shared by the engine, the CLI, and the HTTP layer.

Every error carries a stable ``code`` used for machine-readable CLI output
and for structured HTTP error bodies. The three abstract groups map onto
HTTP status classes: NotFoundError -> 404, LifecycleError -> 409,
InvariantError -> 422.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all engine errors."""

    code = "workbench_error"

    def __init__(self, message: str, *, location: str = ""):
        super().__init__(message)
        self.message = message
        self.location = location

    def to_dict(self) -> dict:
        body = {"code": self.code, "message": self.message}
        if self.location:
            body["location"] = self.location
        return body


class NotFoundError(WorkbenchError):
    """A referenced entity (role, asset, category, matrix, cell, scenario) does not exist."""

    code = "not_found"


class UnknownScenario(NotFoundError):
    code = "unknown_scenario"


class LifecycleError(WorkbenchError):
    """The operation conflicts with the current lifecycle state of an entity."""

    code = "lifecycle_error"


class NotUnresolved(LifecycleError):
    code = "not_unresolved"


class MergeIntoEliminated(LifecycleError):
    code = "merge_into_eliminated"


class MergeIntoMerged(LifecycleError):
    code = "merge_into_merged"


class MergeCycle(LifecycleError):
    code = "merge_cycle"


class SelfMerge(LifecycleError):
    code = "self_merge"


class CategoryExcluded(LifecycleError):
    code = "category_excluded"


class MatrixAlreadyGenerated(LifecycleError):
    code = "matrix_already_generated"


class DuplicateMatrixForCategoryInstance(LifecycleError):
    code = "duplicate_matrix"


class DuplicateNameConflict(LifecycleError):
    code = "duplicate_name"


class ReferencedEntityRemoval(LifecycleError):
    code = "referenced_entity_removal"


class MatrixIncomplete(LifecycleError):
    code = "matrix_incomplete"


class VersionConflict(LifecycleError):
    code = "version_conflict"

    def __init__(self, message: str, *, expected: int, actual: int):
        super().__init__(message)
        self.expected = expected
        self.actual = actual

    def to_dict(self) -> dict:
        body = super().to_dict()
        body["expected"] = self.expected
        body["actual"] = self.actual
        return body


class InvariantError(WorkbenchError):
    """The request is well-addressed but violates a model invariant."""

    code = "invariant_error"


class EmptyRationale(InvariantError):
    code = "empty_rationale"


class EmptyScope(InvariantError):
    code = "empty_scope"


class EmptyScenarioList(InvariantError):
    code = "empty_scenario_list"


class PartyMismatch(InvariantError):
    code = "party_mismatch"


class DanglingMergeChain(InvariantError):
    code = "dangling_merge_chain"


class OutOfRange(InvariantError):
    code = "out_of_range"


class InvariantViolation(InvariantError):
    """A persisted or supplied document is in an illegal state."""

    code = "invariant_violation"


class SchemaTooNew(InvariantError):
    code = "schema_too_new"


class ParseError(InvariantError):
    """Unparseable document; carries line/position when known."""

    code = "parse_error"

    def __init__(self, message: str, *, line: int = 0, position: int = 0):
        super().__init__(message)
        self.line = line
        self.position = position

    def to_dict(self) -> dict:
        body = super().to_dict()
        if self.line:
            body["line"] = self.line
            body["position"] = self.position
        return body
