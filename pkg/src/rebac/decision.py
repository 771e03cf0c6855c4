"""Authorization decision record with per-request work counters."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Trace:
    """What one check did: principal loop size, predicate work, cache reuse.

    ``enabled_principals`` is populated only when the full enabled set was
    computed (eager matching); lazy matching leaves it ``None``.
    """

    principals_considered: int = 0
    formulas_evaluated: int = 0
    cache_hits: int = 0
    enabled_principals: frozenset[str] | None = None
    elapsed_us: float = 0.0

    def to_json(self) -> dict:
        enabled = None
        if self.enabled_principals is not None:
            enabled = sorted(self.enabled_principals)
        return {
            "principals_considered": self.principals_considered,
            "formulas_evaluated": self.formulas_evaluated,
            "cache_hits": self.cache_hits,
            "enabled_principals": enabled,
            "elapsed_us": self.elapsed_us,
        }


@dataclass
class Decision:
    allow: bool
    trace: Trace = field(default_factory=Trace)

    def to_json(self) -> dict:
        return {"allow": self.allow, "trace": self.trace.to_json()}
