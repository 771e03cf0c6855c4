"""Access requests and the four relationship-based authorization algorithms.

A request is the triple (resource, user, guard).  A principal is enabled
for a request when its relationship predicate holds over (resource, user).
Two grant semantics exist:

* liberal -- privileges pooled from every enabled principal may together
  satisfy the guard;
* strict -- some single enabled principal must satisfy the guard alone.

and two matching strategies:

* eager -- compute the full enabled set, then decide;
* lazy -- walk principals in order, skip those whose privileges cannot
  contribute, memoize predicate evaluations by formula id, and stop as
  soon as the decision is known.

Strategies never change the decision, only the work done; the trace on
each Decision records that work.  Principals are always visited in
lexicographic id order, so traces and benchmarks are reproducible.

Combined mode runs the legacy role check first and consults the
relationship engine only when roles already grant access; the request is
allowed when both mechanisms allow it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

from . import hl
from .decision import Decision, Trace
from .errors import EvaluationError, RebacError, UnknownVertex
from .graph import AuthorizationGraph
from .policy import Guard, PolicyStore, satisfies
from .rbac import RbacTables, rbac_privileges

SEMANTICS = ("liberal", "strict")
STRATEGIES = ("eager", "lazy")
MODES = ("rbac-only", "rebac-only", "both")


@dataclass(frozen=True)
class AccessRequest:
    resource: str
    user: str
    guard: Guard


@dataclass(frozen=True)
class EngineConfig:
    semantics: str = "liberal"
    strategy: str = "lazy"
    mode: str = "both"

    def __post_init__(self):
        if self.semantics not in SEMANTICS:
            raise ValueError(f"semantics must be one of {SEMANTICS}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


class _PredicateCache:
    """Per-request memo of relationship-predicate results, keyed by formula id.

    Principals sharing a formula id share one evaluation; the counters
    feed the decision trace.
    """

    def __init__(self, store: PolicyStore, graph: AuthorizationGraph,
                 resource: str, user: str):
        self._store = store
        self._graph = graph
        self._resource = resource
        self._user = user
        self._memo: dict[str, bool] = {}
        self.evaluations = 0
        self.hits = 0

    def holds(self, principal: str, formula_id: str) -> bool:
        if formula_id in self._memo:
            self.hits += 1
            return self._memo[formula_id]
        formula = self._store.formulas.get(formula_id)
        if formula is None:
            raise EvaluationError(principal, KeyError(f"unknown formula {formula_id!r}"))
        try:
            value = hl.relationship_predicate(formula, self._graph, self._resource, self._user)
        except RebacError as exc:
            raise EvaluationError(principal, exc) from exc
        self.evaluations += 1
        self._memo[formula_id] = value
        return value


def _principal_order(store: PolicyStore) -> list[str]:
    return sorted(store.matching_rules)


def _grants(store: PolicyStore, principal: str) -> frozenset[str]:
    return store.authorization_rules.get(principal, frozenset())


def enabled_principals(store: PolicyStore, graph: AuthorizationGraph,
                       resource: str, user: str) -> set[str]:
    """Exactly the principals whose relationship predicate holds for
    (resource, user); each distinct formula is evaluated at most once."""
    cache = _PredicateCache(store, graph, resource, user)
    with graph.read():
        return {
            ap for ap in _principal_order(store)
            if cache.holds(ap, store.matching_rules[ap])
        }


def _check_eager(store: PolicyStore, graph: AuthorizationGraph,
                 req: AccessRequest, semantics: str) -> Decision:
    cache = _PredicateCache(store, graph, req.resource, req.user)
    order = _principal_order(store)
    with graph.read():
        enabled = [ap for ap in order if cache.holds(ap, store.matching_rules[ap])]
    if semantics == "liberal":
        pooled: set[str] = set()
        for ap in enabled:
            pooled |= _grants(store, ap)
        allow = satisfies(pooled, req.guard)
    else:
        allow = any(satisfies(_grants(store, ap), req.guard) for ap in enabled)
    return Decision(allow, Trace(
        principals_considered=len(order),
        formulas_evaluated=cache.evaluations,
        cache_hits=cache.hits,
        enabled_principals=frozenset(enabled),
    ))


def check_eager_liberal(store: PolicyStore, graph: AuthorizationGraph,
                        req: AccessRequest) -> Decision:
    return _check_eager(store, graph, req, "liberal")


def check_eager_strict(store: PolicyStore, graph: AuthorizationGraph,
                       req: AccessRequest) -> Decision:
    return _check_eager(store, graph, req, "strict")


def check_lazy_liberal(store: PolicyStore, graph: AuthorizationGraph,
                       req: AccessRequest) -> Decision:
    """Accumulate privileges principal by principal, skipping any whose
    grants cannot add a still-needed guard privilege, and stop as soon as
    the accumulated set satisfies the guard."""
    needed = req.guard.privileges
    cache = _PredicateCache(store, graph, req.resource, req.user)
    pooled: set[str] = set()
    considered = 0
    with graph.read():
        for ap in _principal_order(store):
            considered += 1
            grants = _grants(store, ap)
            if not (grants - pooled) & needed:
                continue
            if cache.holds(ap, store.matching_rules[ap]):
                pooled |= grants
                if satisfies(pooled, req.guard):
                    return Decision(True, Trace(considered, cache.evaluations, cache.hits))
    return Decision(False, Trace(considered, cache.evaluations, cache.hits))


def check_lazy_strict(store: PolicyStore, graph: AuthorizationGraph,
                      req: AccessRequest) -> Decision:
    """Consider only principals that could satisfy the guard single-handedly
    and allow on the first one that is enabled.  A memo hit here is always
    False: a true predicate would already have allowed the request."""
    cache = _PredicateCache(store, graph, req.resource, req.user)
    considered = 0
    with graph.read():
        for ap in _principal_order(store):
            considered += 1
            if not satisfies(_grants(store, ap), req.guard):
                continue
            if cache.holds(ap, store.matching_rules[ap]):
                return Decision(True, Trace(considered, cache.evaluations, cache.hits))
    return Decision(False, Trace(considered, cache.evaluations, cache.hits))


_REBAC_CHECKS = {
    ("eager", "liberal"): check_eager_liberal,
    ("eager", "strict"): check_eager_strict,
    ("lazy", "liberal"): check_lazy_liberal,
    ("lazy", "strict"): check_lazy_strict,
}


def check(store: PolicyStore, graph: AuthorizationGraph, tables: RbacTables,
          req: AccessRequest, cfg: EngineConfig) -> Decision:
    """Authorize one request under the configured mode.

    Combined mode checks roles first and runs relationship matching only
    when the role check grants; access requires both mechanisms to allow.
    """
    start = time.perf_counter()
    with graph.read():
        for v in (req.resource, req.user):
            if not graph.has_vertex(v):
                raise UnknownVertex(v)
        if cfg.mode == "rbac-only":
            decision = Decision(satisfies(rbac_privileges(tables, req.user), req.guard))
        elif cfg.mode == "rebac-only":
            decision = _REBAC_CHECKS[(cfg.strategy, cfg.semantics)](store, graph, req)
        else:
            if not satisfies(rbac_privileges(tables, req.user), req.guard):
                decision = Decision(False)
            else:
                decision = _REBAC_CHECKS[(cfg.strategy, cfg.semantics)](store, graph, req)
    decision.trace.elapsed_us = (time.perf_counter() - start) * 1e6
    return decision


def filter_collection(store: PolicyStore, graph: AuthorizationGraph, tables: RbacTables,
                      user: str, guard: Guard, resources: Iterable[str],
                      cfg: EngineConfig) -> list[str]:
    """Order-preserving subset of resources the user may access."""
    with graph.read():
        return [
            r for r in resources
            if check(store, graph, tables, AccessRequest(r, user, guard), cfg).allow
        ]
