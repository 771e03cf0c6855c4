"""Administrative actions: declared, precondition-guarded, atomic edge updates.

An action lets a qualified non-administrator (the ``user``) update
access-control relationships around a ``patient``: a referral, a team
assignment, and so on.  The declaration names an enabling precondition
over (user, patient), a list of auxiliary participants, an applicability
precondition over all participants, and a list of add/del edge effects.

Execution re-checks both preconditions inside the exclusive write
transaction (closing the time-of-check-to-time-of-use window) and then
applies the effects atomically: all of them, or none.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

from . import hl
from .errors import (
    AddExistingEdge,
    DeleteMissingEdge,
    EvaluationError,
    NotApplicable,
    NotEnabled,
    PolicyError,
    RebacError,
    UnboundParticipant,
    UnknownAction,
    UnknownVertex,
)
from .graph import ACCESS_CONTROL, AuthorizationGraph

if TYPE_CHECKING:
    from .policy import PolicyStore

PRIMARY_PARTICIPANTS = ("user", "patient")


@dataclass(frozen=True)
class Update:
    op: str  # "add" | "del"
    rel: str  # must be an access-control relation
    x: str  # participant name (primary or auxiliary)
    y: str


@dataclass(frozen=True)
class AdminActionDecl:
    id: str
    enabling: str  # formula id over vars (user, patient)
    participants: tuple[str, ...]  # auxiliary participant names
    applicability: str  # formula id over vars (user, patient, *participants)
    effects: tuple[Update, ...]

    @property
    def all_participants(self) -> tuple[str, ...]:
        return PRIMARY_PARTICIPANTS + self.participants


# Binding: participant name -> vertex id, total over the declaration's
# participants plus the two primaries.
Binding = Mapping[str, str]


@dataclass(frozen=True)
class ExecutionReport:
    action: str
    applied: tuple[tuple[str, str, str, str], ...]  # (op, rel, src, dst)


def _holds(store: "PolicyStore", graph: AuthorizationGraph, action_id: str,
           formula_id: str, valuation: Mapping[str, str]) -> bool:
    formula = store.formulas.get(formula_id)
    if formula is None:
        raise EvaluationError(f"action {action_id}", PolicyError(f"unknown formula {formula_id!r}"))
    try:
        return hl.evaluate(formula, graph, valuation)
    except RebacError as exc:
        raise EvaluationError(f"action {action_id}", exc) from exc


def enabled_actions(store: "PolicyStore", graph: AuthorizationGraph,
                    user: str, patient: str) -> list[str]:
    """Ids of actions whose enabling precondition holds for (user, patient),
    in declaration order."""
    valuation = {"user": user, "patient": patient}
    with graph.read():
        return [
            decl.id
            for decl in store.admin_actions.values()
            if _holds(store, graph, decl.id, decl.enabling, valuation)
        ]


def execute_action(store: "PolicyStore", graph: AuthorizationGraph,
                   action_id: str, binding: Binding) -> ExecutionReport:
    """Run one administrative action atomically.

    Inside one exclusive write transaction: re-evaluate the enabling and
    applicability preconditions, validate every effect against the
    pre-state (add requires absence, del requires presence), then apply.
    Any failure leaves the graph exactly as it was.
    """
    decl = store.admin_actions.get(action_id)
    if decl is None:
        raise UnknownAction(action_id)
    for name in decl.all_participants:
        if name not in binding:
            raise UnboundParticipant(f"{action_id}: participant {name!r} not bound")

    with graph.write():
        if not _holds(store, graph, action_id, decl.enabling, binding):
            raise NotEnabled(action_id)
        if not _holds(store, graph, action_id, decl.applicability, binding):
            raise NotApplicable(action_id)

        resolved = [(u.op, u.rel, binding[u.x], binding[u.y]) for u in decl.effects]

        # Full validation pass before any mutation.  The overlay tracks the
        # in-flight effect sequence so aliased bindings (two participants
        # bound to one vertex) are caught here instead of mid-apply.
        overlay: dict[tuple[str, str, str], bool] = {}
        for op, rel, s, d in resolved:
            if graph.relation_category(rel) != ACCESS_CONTROL:
                raise PolicyError(f"{action_id}: effect relation {rel!r} is not access-control")
            for v in (s, d):
                if not graph.has_vertex(v):
                    raise UnknownVertex(v)
            exists = overlay.get((rel, s, d), graph.has_edge(s, rel, d))
            if op == "add" and exists:
                raise AddExistingEdge(f"{action_id}: edge ({s}, {rel}, {d}) already present")
            if op == "del" and not exists:
                raise DeleteMissingEdge(f"{action_id}: edge ({s}, {rel}, {d}) not present")
            overlay[(rel, s, d)] = op == "add"

        applied: list[tuple[str, str, str, str]] = []
        try:
            for op, rel, s, d in resolved:
                if op == "add":
                    graph.add_edge(s, rel, d)
                else:
                    graph.del_edge(s, rel, d)
                applied.append((op, rel, s, d))
        except BaseException:
            for op, rel, s, d in reversed(applied):
                if op == "add":
                    graph.del_edge(s, rel, d)
                else:
                    graph.add_edge(s, rel, d)
            raise

    return ExecutionReport(action_id, tuple(resolved))
