"""Newline-delimited JSON policy decision point over plain TCP.

One JSON object per line in, one per line out, in request order per
connection.  Requests name an ``op`` plus its operands; responses carry
``ok`` with either ``result`` or a structured ``error``, plus the
server-side ``latency_us``::

    {"op": "check", "resource": "rec1", "user": "d1",
     "guard": {"kind": "one-of", "privileges": ["p1"]}}
    {"ok": true, "result": {"allow": true, "trace": {...}}, "latency_us": 42.0}

Supported ops: ``check``, ``filter``, ``match``, ``admin.enabled``,
``admin.exec``.  Results mirror the corresponding library calls exactly.
A malformed line yields a ``parse`` error response and the connection
stays open.  Connections are handled concurrently; graph reads run in
parallel while ``admin.exec`` serializes through the graph's write
transaction.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import time
from typing import Mapping

from . import admin, engine
from .errors import PolicyError, RebacError
from .graph import AuthorizationGraph
from .policy import PolicyStore, guard_from_json
from .rbac import RbacTables


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server: PdpServer = self.server  # type: ignore[assignment]
        for raw in self.rfile:
            line = raw.strip()
            if not line:
                continue
            start = time.perf_counter()
            try:
                request = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._reply({"ok": False, "error": {"code": "parse", "message": str(exc)}},
                            start)
                continue
            try:
                result = server.dispatch(request)
                response = {"ok": True, "result": result}
            except RebacError as exc:
                response = {"ok": False, "error": {"code": exc.code, "message": str(exc)}}
            except (KeyError, TypeError, ValueError) as exc:
                response = {"ok": False,
                            "error": {"code": "bad_request", "message": repr(exc)}}
            self._reply(response, start)

    def _reply(self, response: dict, start: float) -> None:
        response["latency_us"] = (time.perf_counter() - start) * 1e6
        self.wfile.write(json.dumps(response).encode("utf-8") + b"\n")
        self.wfile.flush()


class PdpServer(socketserver.ThreadingTCPServer):
    """Serves one graph/policy snapshot; one handler thread per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], graph: AuthorizationGraph,
                 store: PolicyStore, cfg: engine.EngineConfig | None = None,
                 tables: RbacTables | None = None):
        super().__init__(address, _Handler)
        self.graph = graph
        self.store = store
        self.tables = tables if tables is not None else store.rbac
        self.cfg = cfg or engine.EngineConfig()
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def start(self) -> "PdpServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    # --- request dispatch ---

    def dispatch(self, request) -> dict:
        if not isinstance(request, Mapping):
            raise PolicyError("request must be a JSON object")
        op = request.get("op")
        if op == "check":
            req = engine.AccessRequest(
                resource=self._field(request, "resource"),
                user=self._field(request, "user"),
                guard=guard_from_json(request["guard"]),
            )
            return engine.check(self.store, self.graph, self.tables, req, self.cfg).to_json()
        if op == "filter":
            resources = request.get("resources", [])
            if not isinstance(resources, list):
                raise PolicyError("'resources' must be a list")
            allowed = engine.filter_collection(
                self.store, self.graph, self.tables,
                self._field(request, "user"), guard_from_json(request["guard"]),
                resources, self.cfg)
            return {"allowed": allowed}
        if op == "match":
            enabled = engine.enabled_principals(
                self.store, self.graph,
                self._field(request, "resource"), self._field(request, "user"))
            return {"principals": sorted(enabled)}
        if op == "admin.enabled":
            actions = admin.enabled_actions(
                self.store, self.graph,
                self._field(request, "user"), self._field(request, "patient"))
            return {"actions": actions}
        if op == "admin.exec":
            bindings = request.get("bindings", {})
            if not isinstance(bindings, Mapping):
                raise PolicyError("'bindings' must be an object")
            binding = {
                "user": self._field(request, "user"),
                "patient": self._field(request, "patient"),
                **{str(k): str(v) for k, v in bindings.items()},
            }
            report = admin.execute_action(
                self.store, self.graph, self._field(request, "action"), binding)
            return {"action": report.action,
                    "applied": [list(u) for u in report.applied]}
        raise PolicyError(f"unknown op {op!r}")

    @staticmethod
    def _field(request: Mapping, key: str) -> str:
        value = request.get(key)
        if not isinstance(value, str):
            raise PolicyError(f"{key!r} must be a string")
        return value


def serve(listen: str, graph: AuthorizationGraph, store: PolicyStore,
          cfg: engine.EngineConfig | None = None) -> None:
    """Blocking entry point: ``listen`` is ``host:port``."""
    host, _, port = listen.rpartition(":")
    server = PdpServer((host or "127.0.0.1", int(port)), graph, store, cfg)
    with server:
        server.serve_forever()


class PdpClient:
    """Minimal line-oriented client, mainly for tests and scripting."""

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rwb")

    def call(self, request: dict) -> dict:
        return self.call_raw(json.dumps(request).encode("utf-8"))

    def call_raw(self, line: bytes) -> dict:
        self._file.write(line + b"\n")
        self._file.flush()
        reply = self._file.readline()
        if not reply:
            raise ConnectionError("server closed connection")
        return json.loads(reply)

    def close(self) -> None:
        self._file.close()
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False
