"""Flat RBAC baseline: role tables and guard checks against granted roles.

No role hierarchy (roles arrive pre-flattened) and no sessions: every
role assigned to a user counts as active on every request.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .decision import Decision, Trace
from .policy import Guard, satisfies


@dataclass(frozen=True)
class RbacTables:
    roles: frozenset[str]
    privilege_assignment: Mapping[str, frozenset[str]]  # role -> privileges
    user_assignment: Mapping[str, frozenset[str]]  # user -> roles


def empty_tables() -> RbacTables:
    return RbacTables(frozenset(), {}, {})


def rbac_privileges(tables: RbacTables, user: str) -> frozenset[str]:
    """Union of the privilege sets of every role assigned to the user.

    Unknown users and unassigned roles contribute nothing.
    """
    granted: set[str] = set()
    for role in tables.user_assignment.get(user, frozenset()):
        granted |= tables.privilege_assignment.get(role, frozenset())
    return frozenset(granted)


def rbac_check(tables: RbacTables, user: str, guard: Guard) -> Decision:
    return Decision(allow=satisfies(rbac_privileges(tables, user), guard), trace=Trace())
