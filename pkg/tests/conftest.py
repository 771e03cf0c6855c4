import copy

import pytest

from rebac.graph import load_graph
from rebac.policy import attach_policy, load_policy, validate

# A small end-to-end system: patient p1's record rec1, family doctor d1,
# specialist s1, and a Referral action that grants s1 access by adding a
# referred-clinician edge.

REFERRAL_GRAPH = """\
# referral fixture
R family-doctor access-control
R referred-clinician access-control
V p1 patient
V p2 patient
V d1 user
V s1 user
E d1 family-doctor p1
"""

REFERRAL_POLICY = {
    "relations": [
        {"name": "family-doctor", "category": "access-control"},
        {"name": "referred-clinician", "category": "access-control"},
        {"name": "owner", "category": "system-induced"},
    ],
    "formulas": [
        {"id": "treating", "vars": ["resource", "requestor"],
         "text": "@resource <owner> (<-family-doctor> requestor | <referred-clinician> requestor)"},
        {"id": "can-refer", "vars": ["user", "patient"],
         "text": "@user <family-doctor> patient"},
        {"id": "always", "vars": ["user", "patient", "specialist"], "text": "true"},
        {"id": "fresh-referral", "vars": ["user", "patient", "specialist"],
         "text": "!@patient <referred-clinician> specialist"},
    ],
    "matching_rules": [
        {"principal": "treating-clinician", "formula_id": "treating"},
    ],
    "authorization_rules": [
        {"principal": "treating-clinician", "privileges": ["view-record"]},
    ],
    "rbac": {
        "roles": [{"name": "clinician", "privileges": ["view-record"]}],
        "user_roles": [
            {"user": "d1", "roles": ["clinician"]},
            {"user": "s1", "roles": ["clinician"]},
        ],
    },
    "admin_actions": [
        {"id": "Referral", "enabling": "can-refer", "participants": ["specialist"],
         "applicability": "always",
         "effects": [{"op": "add", "rel": "referred-clinician",
                      "x": "patient", "y": "specialist"}]},
    ],
    "owners": [{"resource": "rec1", "owner": "p1"}],
}


def build_referral_system():
    graph = load_graph(REFERRAL_GRAPH)
    store = load_policy(copy.deepcopy(REFERRAL_POLICY))
    assert validate(store) == []
    attach_policy(graph, store)
    return graph, store


@pytest.fixture
def referral_system():
    return build_referral_system()
