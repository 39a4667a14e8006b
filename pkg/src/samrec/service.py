"""Embedded HTTP service exposing the recommendation endpoints.

Routes::

    GET  /users/{id}/recommendations/roots?limit=k&engine=sam|knn
    GET  /users/{id}/roots/{assetId}/widgets?engine=sam|knn
    POST /interactions
    POST /admin/snapshot
    GET  /health

Both engines answer on identical URL shapes so a benchmark only switches the
``engine`` parameter.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, unquote, urlsplit

from .errors import KindMismatchError, MissingNodeError, NotRootAssetError, SamRecError
from .evaluation import knn_scores
from .graph import AssetKind, ContextGraph, Interaction, InteractionType
from .recommender import (
    Level,
    RankedList,
    RelevanceScore,
    Source,
    rank,
    recommend_roots,
    recommend_widgets,
)
from .relevance import EngineConfig

log = logging.getLogger(__name__)

ENGINES = ("sam", "knn")


class RWLock:
    """Many concurrent readers or one writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    @contextmanager
    def read(self):
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True
        try:
            yield
        finally:
            with self._cond:
                self._writing = False
                self._cond.notify_all()


class BadRequest(SamRecError):
    pass


class Conflict(SamRecError):
    pass


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    snapshot_path: str | None = None
    engine: EngineConfig = field(default_factory=EngineConfig)
    include_consumed: bool = False
    knn_k: int = 10

    def __post_init__(self):
        if not 0 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535] (0 binds a free port)")
        if self.knn_k < 1:
            raise ValueError("knn_k must be at least 1")


class RecommendationService:
    def __init__(self, graph: ContextGraph, config: ServiceConfig | None = None):
        self.graph = graph
        self.config = config or ServiceConfig()
        self.lock = RWLock()
        self._snapshotting = threading.Event()

    def roots(self, user: str, limit: int = 10, engine: str = "sam") -> RankedList:
        with self.lock.read():
            if engine == "sam":
                return recommend_roots(
                    user, self.graph, self.config.engine, limit, self.config.include_consumed
                )
            self.graph.node(user)
            candidates = self.graph.root_assets()
            if not self.config.include_consumed:
                candidates = [
                    a for a in candidates
                    if not any(i.type is InteractionType.CONSUME for i in self.graph.implicit_interactions(user, a))
                ]
            return RankedList(user, Level.ROOT, self._knn_ranked(user, candidates)[:limit])

    def widgets(self, user: str, root: str, engine: str = "sam") -> RankedList:
        with self.lock.read():
            if engine == "sam":
                return recommend_widgets(user, root, self.graph, self.config.engine)
            self.graph.node(user)
            if self.graph.asset_kind(root) is not AssetKind.ROOT:
                raise NotRootAssetError(f"{root!r} is not a root asset")
            entries = self._knn_ranked(user, self.graph.widgets(root))
            return RankedList(user, Level.WIDGET, entries, scope=root)

    def _knn_ranked(self, user, assets):
        scores = knn_scores(user, assets, self.graph, self.config.knn_k)
        return rank(RelevanceScore(a, v, Source.KNN) for a, v in scores.items())

    def record(self, payload: dict) -> Interaction:
        if not isinstance(payload, dict):
            raise BadRequest("body must be a JSON object")
        missing = [k for k in ("user", "asset", "type", "timestamp") if k not in payload]
        if missing:
            raise BadRequest(f"missing field(s): {', '.join(missing)}")
        try:
            interaction = Interaction(
                str(payload["user"]),
                str(payload["asset"]),
                InteractionType(payload["type"]),
                payload.get("polarity"),
                payload.get("intensity", 0.0),
                payload.get("text"),
                int(payload["timestamp"]),
            )
        except (TypeError, ValueError) as exc:
            raise BadRequest(str(exc)) from None
        if self._snapshotting.is_set():
            raise Conflict("snapshot in progress")
        with self.lock.write():
            self.graph.record_interaction(interaction)
        return interaction

    def snapshot(self, path: str | None = None) -> dict:
        path = path or self.config.snapshot_path
        if not path:
            raise BadRequest("no snapshot path configured")
        with self.lock.read():
            self._snapshotting.set()
            try:
                self.graph.snapshot(path)
            finally:
                self._snapshotting.clear()
            return {"path": str(path), "nodes": len(self.graph), "edges": self.graph.edge_count}

    def health(self) -> dict:
        with self.lock.read():
            return {"status": "ok", "nodes": len(self.graph), "edges": self.graph.edge_count}


def ranked_json(ranked: RankedList) -> bytes:
    entries = ", ".join(
        '{"asset": %s, "score": %.6f, "source": %s}'
        % (json.dumps(e.asset), e.value, json.dumps(e.source.value))
        for e in ranked.entries
    )
    body = '{"user": %s, "level": %s, ' % (json.dumps(ranked.person), json.dumps(ranked.level.value))
    if ranked.scope is not None:
        body += '"scope": %s, ' % json.dumps(ranked.scope)
    return (body + '"entries": [' + entries + "]}").encode()


_ROOTS = re.compile(r"^/users/([^/]+)/recommendations/roots/?$")
_WIDGETS = re.compile(r"^/users/([^/]+)/roots/([^/]+)/widgets/?$")


class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    # headers and body go out in separate writes; avoid the delayed-ACK stall
    disable_nagle_algorithm = True
    service: RecommendationService

    def log_message(self, format, *args):
        log.debug("%s - %s", self.address_string(), format % args)

    def _send(self, status: int, body: bytes = b"", content_type="application/json"):
        self.send_response(status)
        if body:
            self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _error(self, status: int, message: str):
        self._send(status, json.dumps({"error": message}).encode())

    def _dispatch(self, fn):
        try:
            fn()
        except BadRequest as exc:
            self._error(400, str(exc))
        except Conflict as exc:
            self._error(409, str(exc))
        except MissingNodeError as exc:
            self._error(404, str(exc))
        except (NotRootAssetError, KindMismatchError, SamRecError, ValueError) as exc:
            self._error(400, str(exc))

    def do_GET(self):
        self._dispatch(self._get)

    def do_POST(self):
        self._dispatch(self._post)

    def _get(self):
        url = urlsplit(self.path)
        query = parse_qs(url.query)
        engine = query.get("engine", ["sam"])[-1]
        if url.path == "/health":
            return self._send(200, json.dumps(self.service.health()).encode())
        match = _ROOTS.match(url.path)
        if match:
            self._check_engine(engine)
            try:
                limit = int(query.get("limit", ["10"])[-1])
            except ValueError:
                raise BadRequest("limit must be an integer") from None
            if limit < 1:
                raise BadRequest("limit must be at least 1")
            ranked = self.service.roots(unquote(match.group(1)), limit, engine)
            return self._send(200, ranked_json(ranked))
        match = _WIDGETS.match(url.path)
        if match:
            self._check_engine(engine)
            ranked = self.service.widgets(unquote(match.group(1)), unquote(match.group(2)), engine)
            return self._send(200, ranked_json(ranked))
        self._error(404, f"no route for {url.path}")

    def _post(self):
        url = urlsplit(self.path)
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if url.path == "/interactions":
            try:
                payload = json.loads(raw or b"null")
            except (json.JSONDecodeError, UnicodeDecodeError):
                raise BadRequest("malformed JSON body") from None
            self.service.record(payload)
            return self._send(204)
        if url.path == "/admin/snapshot":
            return self._send(200, json.dumps(self.service.snapshot()).encode())
        self._error(404, f"no route for {url.path}")

    @staticmethod
    def _check_engine(engine):
        if engine not in ENGINES:
            raise BadRequest(f"unknown engine {engine!r}; expected one of {', '.join(ENGINES)}")


def make_server(service: RecommendationService, host: str | None = None, port: int | None = None) -> ThreadingHTTPServer:
    """Bind a threaded HTTP server for ``service`` (port 0 picks a free port)."""
    handler = type("BoundHandler", (Handler,), {"service": service})
    server = ThreadingHTTPServer(
        (host if host is not None else service.config.host, port if port is not None else service.config.port),
        handler,
    )
    server.daemon_threads = True
    return server


@contextmanager
def running(service: RecommendationService, host: str = "127.0.0.1", port: int = 0):
    """Serve in a background thread; yields the base URL."""
    server = make_server(service, host, port)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True)
    thread.start()
    try:
        yield f"http://{server.server_address[0]}:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join()
