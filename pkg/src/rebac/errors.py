"""Exception hierarchy shared by all rebac modules."""

from __future__ import annotations


class RebacError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


# --- graph ---

class GraphError(RebacError):
    code = "graph"


class UnknownVertex(GraphError):
    code = "unknown_vertex"


class UnknownRelation(GraphError):
    code = "unknown_relation"


class DuplicateRelation(GraphError):
    code = "duplicate_relation"


class AddExistingEdge(GraphError):
    code = "add_existing_edge"


class DeleteMissingEdge(GraphError):
    code = "delete_missing_edge"


class ReadOnlyRelation(GraphError):
    code = "read_only_relation"


class TransactionRequired(GraphError):
    """A mutation was attempted outside an exclusive write transaction."""

    code = "transaction_required"


class ParseError(RebacError):
    """Malformed textual input (edge-list file or formula text).

    ``location`` is a 1-based line number for file input and a 0-based
    character offset for formula text.
    """

    code = "parse"

    def __init__(self, message: str, location: int | None = None):
        self.location = location
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)


# --- formulas ---

class FormulaError(RebacError):
    code = "formula"


class UnknownVariable(FormulaError):
    code = "unknown_variable"


class NotAnchored(FormulaError):
    code = "not_anchored"


class ArityMismatch(FormulaError):
    code = "arity_mismatch"


# --- policy / engine ---

class PolicyError(RebacError):
    code = "policy"


class EvaluationError(RebacError):
    """A relationship predicate failed to evaluate during a check.

    Tagged with the principal (or admin action) whose formula failed so the
    request can be aborted loudly instead of silently skipping the rule.
    """

    code = "evaluation"

    def __init__(self, subject: str, cause: Exception):
        self.subject = subject
        self.cause = cause
        super().__init__(f"{subject}: {cause}")


# --- admin actions ---

class AdminError(RebacError):
    code = "admin"


class UnknownAction(AdminError):
    code = "unknown_action"


class NotEnabled(AdminError):
    code = "not_enabled"


class NotApplicable(AdminError):
    code = "not_applicable"


class UnboundParticipant(AdminError):
    code = "unbound_participant"


# --- synth ---

class InfeasibleScale(RebacError):
    """Scaled assignment-pair counts exceed the available cross product."""

    code = "infeasible_scale"
