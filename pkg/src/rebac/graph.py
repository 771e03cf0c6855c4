"""Authorization graph: typed vertices, labelled directed edges, providers.

The protection state is an edge-labelled directed graph over users,
patients, resources and abstract entities.  Edges are served by relation
providers falling into three categories:

* ``user-managed`` -- articulated by end users (interpersonal records),
* ``system-induced`` -- computed from backing data (e.g. resource
  ownership); read-only to every mutation API,
* ``access-control`` -- pure protection state, mutable only through
  administrative actions and the administrative edit operations.

Queries answer over the union of all providers and are indexed in both
directions, so ``out``, ``in`` and ``has_edge`` are dictionary lookups.

Concurrency: many concurrent readers, one exclusive writer.  Every
mutation must run inside ``with graph.write(): ...``; readers either see
the pre-write state or block until the writer commits, never a torn
intermediate.
"""

from __future__ import annotations

import re
import threading
from typing import Iterable, Iterator, Mapping

from .errors import (
    AddExistingEdge,
    DeleteMissingEdge,
    DuplicateRelation,
    ParseError,
    ReadOnlyRelation,
    TransactionRequired,
    UnknownRelation,
    UnknownVertex,
)

VERTEX_KINDS = frozenset({"user", "patient", "resource", "entity"})

USER_MANAGED = "user-managed"
SYSTEM_INDUCED = "system-induced"
ACCESS_CONTROL = "access-control"
RELATION_CATEGORIES = frozenset({USER_MANAGED, SYSTEM_INDUCED, ACCESS_CONTROL})

_RELATION_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")

Edge = tuple[str, str, str]  # (src, relation, dst)

_EMPTY: frozenset[str] = frozenset()


class _RWLock:
    """Reentrant readers-writer lock with writer preference.

    A thread holding the write lock may freely take read sections; read
    sections nest.  Upgrading (read -> write) is rejected because it
    deadlocks against other readers.
    """

    def __init__(self):
        self._mutex = threading.Lock()
        self._cond = threading.Condition(self._mutex)
        self._active_readers = 0
        self._waiting_writers = 0
        self._writer: int | None = None
        self._writer_depth = 0
        self._local = threading.local()

    def _read_depth(self) -> int:
        return getattr(self._local, "depth", 0)

    def acquire_read(self) -> None:
        me = threading.get_ident()
        if self._writer == me or self._read_depth() > 0:
            self._local.depth = self._read_depth() + 1
            return
        with self._cond:
            while self._writer is not None or self._waiting_writers:
                self._cond.wait()
            self._active_readers += 1
        self._local.depth = 1

    def release_read(self) -> None:
        depth = self._read_depth() - 1
        self._local.depth = depth
        if depth > 0 or self._writer == threading.get_ident():
            return
        with self._cond:
            self._active_readers -= 1
            if self._active_readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        me = threading.get_ident()
        if self._writer == me:
            self._writer_depth += 1
            return
        if self._read_depth() > 0:
            raise RuntimeError("cannot upgrade a read section to a write transaction")
        with self._cond:
            self._waiting_writers += 1
            try:
                while self._writer is not None or self._active_readers:
                    self._cond.wait()
            finally:
                self._waiting_writers -= 1
            self._writer = me
            self._writer_depth = 1

    def release_write(self) -> None:
        if self._writer != threading.get_ident():
            raise RuntimeError("write lock not held by this thread")
        self._writer_depth -= 1
        if self._writer_depth == 0:
            with self._cond:
                self._writer = None
                self._cond.notify_all()

    def held_by_writer(self) -> bool:
        return self._writer == threading.get_ident()


class _ReadSection:
    __slots__ = ("_lock",)

    def __init__(self, lock: _RWLock):
        self._lock = lock

    def __enter__(self):
        self._lock.acquire_read()
        return self

    def __exit__(self, *exc):
        self._lock.release_read()
        return False


class _WriteTransaction:
    __slots__ = ("_lock",)

    def __init__(self, lock: _RWLock):
        self._lock = lock

    def __enter__(self):
        self._lock.acquire_write()
        return self

    def __exit__(self, *exc):
        self._lock.release_write()
        return False


class RelationProvider:
    """One source of edges; the graph answers over the union of providers."""

    category: str
    mutable = False

    def out(self, v: str, rel: str) -> frozenset[str] | set[str]:
        raise NotImplementedError

    def inc(self, v: str, rel: str) -> frozenset[str] | set[str]:
        raise NotImplementedError

    def relations(self) -> frozenset[str]:
        """Relation names this provider may serve edges for."""
        raise NotImplementedError

    def edges(self) -> Iterator[Edge]:
        raise NotImplementedError


class AdjacencyProvider(RelationProvider):
    """Mutable edge store indexed forward and reverse by (vertex, relation)."""

    mutable = True

    def __init__(self, category: str):
        self.category = category
        self._fwd: dict[tuple[str, str], set[str]] = {}
        self._rev: dict[tuple[str, str], set[str]] = {}
        self._rels: set[str] = set()
        self._count = 0

    def out(self, v, rel):
        return self._fwd.get((v, rel), _EMPTY)

    def inc(self, v, rel):
        return self._rev.get((v, rel), _EMPTY)

    def relations(self):
        return frozenset(self._rels)

    def edges(self):
        for (src, rel), dsts in self._fwd.items():
            for dst in dsts:
                yield (src, rel, dst)

    def __len__(self):
        return self._count

    def has(self, s, rel, d):
        return d in self._fwd.get((s, rel), _EMPTY)

    def add(self, s, rel, d):
        if self.has(s, rel, d):
            raise AddExistingEdge(f"edge ({s}, {rel}, {d}) already present")
        self._fwd.setdefault((s, rel), set()).add(d)
        self._rev.setdefault((d, rel), set()).add(s)
        self._rels.add(rel)
        self._count += 1

    def remove(self, s, rel, d):
        if not self.has(s, rel, d):
            raise DeleteMissingEdge(f"edge ({s}, {rel}, {d}) not present")
        self._fwd[(s, rel)].discard(d)
        self._rev[(d, rel)].discard(s)
        self._count -= 1


class OwnerTableProvider(RelationProvider):
    """System-induced ``owner`` edges computed from a resource->owner table.

    The provider is a pure function of the table snapshot taken at
    construction; it never stores edges of its own.
    """

    category = SYSTEM_INDUCED
    relation = "owner"

    def __init__(self, owners: Mapping[str, Iterable[str]]):
        self._fwd = {r: frozenset(os) for r, os in owners.items()}
        rev: dict[str, set[str]] = {}
        for resource, os in self._fwd.items():
            for owner in os:
                rev.setdefault(owner, set()).add(resource)
        self._rev = {o: frozenset(rs) for o, rs in rev.items()}

    def out(self, v, rel):
        if rel != self.relation:
            return _EMPTY
        return self._fwd.get(v, _EMPTY)

    def inc(self, v, rel):
        if rel != self.relation:
            return _EMPTY
        return self._rev.get(v, _EMPTY)

    def relations(self):
        return frozenset({self.relation})

    def edges(self):
        for resource, os in self._fwd.items():
            for owner in os:
                yield (resource, self.relation, owner)


class AuthorizationGraph:
    """Composed protection state: vertices plus the union of providers."""

    def __init__(self):
        self._vertices: dict[str, str] = {}
        self._relations: dict[str, str] = {}
        self._stores: dict[str, AdjacencyProvider] = {
            USER_MANAGED: AdjacencyProvider(USER_MANAGED),
            ACCESS_CONTROL: AdjacencyProvider(ACCESS_CONTROL),
        }
        self._providers: list[RelationProvider] = list(self._stores.values())
        self._lock = _RWLock()

    # --- locking ---

    def read(self) -> _ReadSection:
        return _ReadSection(self._lock)

    def write(self) -> _WriteTransaction:
        """Exclusive write transaction; required for every mutation."""
        return _WriteTransaction(self._lock)

    def _require_write(self) -> None:
        if not self._lock.held_by_writer():
            raise TransactionRequired("mutation outside a write transaction")

    # --- vertices / relations ---

    def add_vertex(self, vid: str, kind: str) -> None:
        self._require_write()
        if kind not in VERTEX_KINDS:
            raise ValueError(f"unknown vertex kind {kind!r}")
        if vid in self._vertices:
            raise ValueError(f"vertex {vid!r} already present")
        self._vertices[vid] = kind

    def has_vertex(self, vid: str) -> bool:
        return vid in self._vertices

    def kind_of(self, vid: str) -> str:
        try:
            return self._vertices[vid]
        except KeyError:
            raise UnknownVertex(vid) from None

    def vertices(self) -> dict[str, str]:
        with self.read():
            return dict(self._vertices)

    def declare_relation(self, name: str, category: str) -> None:
        self._require_write()
        if not _RELATION_NAME.match(name):
            raise ValueError(f"invalid relation name {name!r}")
        if category not in RELATION_CATEGORIES:
            raise ValueError(f"unknown relation category {category!r}")
        if name in self._relations:
            raise DuplicateRelation(name)
        self._relations[name] = category

    def ensure_relation(self, name: str, category: str) -> None:
        """Idempotent declare; conflicting category is an error."""
        existing = self._relations.get(name)
        if existing is None:
            self.declare_relation(name, category)
        elif existing != category:
            raise DuplicateRelation(
                f"relation {name!r} declared as both {existing} and {category}"
            )

    def relations(self) -> dict[str, str]:
        with self.read():
            return dict(self._relations)

    def relation_category(self, name: str) -> str:
        try:
            return self._relations[name]
        except KeyError:
            raise UnknownRelation(name) from None

    def add_provider(self, provider: RelationProvider) -> None:
        """Attach a computed provider (e.g. the owner table) at startup."""
        self._require_write()
        for rel in provider.relations():
            self.ensure_relation(rel, provider.category)
        self._providers.append(provider)

    # --- queries ---

    def _check_query(self, v: str, rel: str) -> None:
        if v not in self._vertices:
            raise UnknownVertex(v)
        if rel not in self._relations:
            raise UnknownRelation(rel)

    def _out(self, v: str, rel: str):
        """No-copy union over providers; caller must hold a read section."""
        result = None
        for p in self._providers:
            s = p.out(v, rel)
            if s:
                result = s if result is None else result | s
        return result if result is not None else _EMPTY

    def _in(self, v: str, rel: str):
        result = None
        for p in self._providers:
            s = p.inc(v, rel)
            if s:
                result = s if result is None else result | s
        return result if result is not None else _EMPTY

    def out_neighbors(self, v: str, rel: str) -> set[str]:
        with self.read():
            self._check_query(v, rel)
            return set(self._out(v, rel))

    def in_neighbors(self, v: str, rel: str) -> set[str]:
        with self.read():
            self._check_query(v, rel)
            return set(self._in(v, rel))

    def has_edge(self, s: str, rel: str, d: str) -> bool:
        with self.read():
            self._check_query(s, rel)
            return d in self._out(s, rel)

    def edge_set(self) -> frozenset[Edge]:
        """Every edge currently observable, across all providers."""
        with self.read():
            out: set[Edge] = set()
            for p in self._providers:
                out.update(p.edges())
            return frozenset(out)

    def edge_count(self) -> int:
        return len(self.edge_set())

    # --- mutation ---

    def _mutable_store(self, rel: str) -> AdjacencyProvider:
        category = self.relation_category(rel)
        if category == SYSTEM_INDUCED:
            raise ReadOnlyRelation(rel)
        return self._stores[category]

    def add_edge(self, s: str, rel: str, d: str) -> None:
        self._require_write()
        store = self._mutable_store(rel)
        for v in (s, d):
            if v not in self._vertices:
                raise UnknownVertex(v)
        store.add(s, rel, d)

    def del_edge(self, s: str, rel: str, d: str) -> None:
        self._require_write()
        store = self._mutable_store(rel)
        for v in (s, d):
            if v not in self._vertices:
                raise UnknownVertex(v)
        store.remove(s, rel, d)


# --- edge-list text format ---
#
#   # comment
#   R <name> <category>
#   V <id> <kind>
#   E <src> <rel> <dst>
#
# Relation declarations precede the edges that use them; fields are
# whitespace-separated and identifiers carry no whitespace.  The format
# persists the stored (user-managed / access-control) relations only;
# system-induced providers are runtime attachments rebuilt from policy.


def load_graph(text: str) -> AuthorizationGraph:
    g = AuthorizationGraph()
    with g.write():
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            tag = fields[0]
            try:
                if tag == "R":
                    if len(fields) != 3:
                        raise ParseError("R line needs <name> <category>", lineno)
                    g.declare_relation(fields[1], fields[2])
                elif tag == "V":
                    if len(fields) != 3:
                        raise ParseError("V line needs <id> <kind>", lineno)
                    g.add_vertex(fields[1], fields[2])
                elif tag == "E":
                    if len(fields) != 4:
                        raise ParseError("E line needs <src> <rel> <dst>", lineno)
                    g.add_edge(fields[1], fields[2], fields[3])
                else:
                    raise ParseError(f"unknown directive {tag!r}", lineno)
            except ParseError:
                raise
            except (ValueError, DuplicateRelation, AddExistingEdge, UnknownVertex,
                    UnknownRelation, ReadOnlyRelation) as exc:
                raise ParseError(str(exc), lineno) from exc
    return g


def save_graph(g: AuthorizationGraph) -> str:
    lines: list[str] = []
    with g.read():
        for name, category in sorted(g._relations.items()):
            if category != SYSTEM_INDUCED:
                lines.append(f"R {name} {category}")
        for vid, kind in sorted(g._vertices.items()):
            lines.append(f"V {vid} {kind}")
        stored: list[Edge] = []
        for store in g._stores.values():
            stored.extend(store.edges())
        for s, rel, d in sorted(stored):
            lines.append(f"E {s} {rel} {d}")
    return "\n".join(lines) + "\n"


def load_graph_file(path) -> AuthorizationGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_graph(fh.read())


def save_graph_file(g: AuthorizationGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_graph(g))
