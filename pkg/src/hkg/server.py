"""HTTP service over saved graph artifacts.

Serves the layered structure, document text, and edge evidence; accepts
interaction events; reports per-session metrics. Read endpoints are pure
over the loaded artifacts: identical requests yield identical bodies.
Degraded variants are pre-built by the CLI and registered by artifact
file name; nothing is degraded on the fly.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics, store
from .graph import (
    KnowledgeGraph,
    UnknownEntityError,
    VisibilityStateError,
    document_subgraph,
    expand_state,
    visible_nodes,
)
from .store import EventLog, HkgArtifact, OutOfOrderEventError

logger = logging.getLogger(__name__)

DEFAULT_HIDE_THRESHOLD = 2


class ServerError(Exception):
    """Startup failures: no artifacts, unreadable log path."""


@dataclass
class SessionState:
    """Per-session mutable state; mutated only by that session's requests."""

    session_id: str
    created_at: float
    visible: dict[tuple[str, str], set[str]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class GraphRegistry:
    """Loaded artifacts by graph id, with cached per-document subgraphs."""

    graphs: dict[str, HkgArtifact]
    _subgraphs: dict[tuple[str, str], KnowledgeGraph] = field(default_factory=dict)

    def subgraph(self, graph_id: str, doc_id: str) -> KnowledgeGraph:
        key = (graph_id, doc_id)
        if key not in self._subgraphs:
            detail = self.graphs[graph_id].hkg.detail
            self._subgraphs[key] = document_subgraph(detail, doc_id, missing_ok=True)
        return self._subgraphs[key]


def load_registry(artifacts_dir: str | Path) -> GraphRegistry:
    """Load every hkg-kind artifact in a directory; id = file stem."""
    artifacts_dir = Path(artifacts_dir)
    graphs: dict[str, HkgArtifact] = {}
    for path in sorted(artifacts_dir.glob("*.json")):
        try:
            artifact = store.load(path)
        except store.StoreError as exc:
            logger.warning("skipping %s: %s", path.name, exc)
            continue
        if isinstance(artifact, HkgArtifact):
            graphs[path.stem] = artifact
        else:
            logger.info("skipping %s: not an hkg artifact", path.name)
    if not graphs:
        raise ServerError(f"no loadable hkg artifacts in {artifacts_dir}")
    return GraphRegistry(graphs=graphs)


class ExpandRequest(BaseModel):
    session: str
    node: str


class EventRequest(BaseModel):
    session: str
    t_ms: int
    kind: str
    payload: dict = {}


def _error(status: int, code: str, detail: str | None = None) -> JSONResponse:
    body: dict = {"error": code}
    if detail:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


def create_app(
    registry: GraphRegistry,
    event_log: EventLog,
    hide_threshold: int = DEFAULT_HIDE_THRESHOLD,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="hkg", docs_url=None, redoc_url=None)
    sessions: dict[str, SessionState] = {}
    sessions_lock = threading.Lock()

    def graph_or_none(graph_id: str) -> HkgArtifact | None:
        return registry.graphs.get(graph_id)

    @app.get("/api/graphs")
    def list_graphs():
        out = []
        for graph_id in sorted(registry.graphs):
            artifact = registry.graphs[graph_id]
            out.append(
                {
                    "id": graph_id,
                    "nodes": len(artifact.hkg.detail.nodes),
                    "edges": len(artifact.hkg.detail.edges),
                    "quality": artifact.quality.to_dict() if artifact.quality else None,
                }
            )
        return out

    @app.get("/api/graphs/{graph_id}/collection")
    def collection(graph_id: str):
        artifact = graph_or_none(graph_id)
        if artifact is None:
            return _error(404, "unknown_graph")
        return {
            "partitions": [
                {
                    "id": part.partition_id,
                    "query": part.query,
                    "documents": [
                        {
                            "id": doc_id,
                            "title": artifact.corpus.documents[doc_id].title,
                            "url": artifact.corpus.documents[doc_id].source_url,
                            "rank": artifact.corpus.documents[doc_id].rank,
                        }
                        for doc_id in part.documents
                    ],
                }
                for part in artifact.hkg.collection
            ]
        }

    @app.get("/api/graphs/{graph_id}/documents/{doc_id}/minimap")
    def minimap(graph_id: str, doc_id: str):
        artifact = graph_or_none(graph_id)
        if artifact is None:
            return _error(404, "unknown_graph")
        if doc_id not in artifact.corpus.documents:
            return _error(404, "unknown_document")
        concepts = artifact.hkg.minimaps.get(doc_id, ())
        mappings = artifact.hkg.mappings.get(doc_id, {})
        return {
            "doc_id": doc_id,
            "concepts": [
                {
                    "entity": c.entity,
                    "degree": c.degree,
                    "frequency": c.frequency,
                    "anchors": list(mappings.get(c.entity, ())),
                }
                for c in concepts
            ],
        }

    def _initial_visible(artifact: HkgArtifact, graph_id: str, doc_id: str) -> set[str]:
        sub = registry.subgraph(graph_id, doc_id)
        centrals = [c.entity for c in artifact.hkg.minimaps.get(doc_id, ())]
        return visible_nodes(sub, doc_id, hide_threshold, centrals)

    @app.get("/api/graphs/{graph_id}/documents/{doc_id}/detail")
    def detail(graph_id: str, doc_id: str, visible_only: bool = False):
        artifact = graph_or_none(graph_id)
        if artifact is None:
            return _error(404, "unknown_graph")
        if doc_id not in artifact.corpus.documents:
            return _error(404, "unknown_document")
        sub = registry.subgraph(graph_id, doc_id)
        visible = _initial_visible(artifact, graph_id, doc_id)
        centrals = {c.entity for c in artifact.hkg.minimaps.get(doc_id, ())}
        shown = sorted(visible) if visible_only else sorted(sub.nodes)
        shown_set = set(shown)
        return {
            "doc_id": doc_id,
            "hide_threshold": hide_threshold,
            "nodes": [
                {
                    "entity": entity,
                    "label": sub.nodes[entity].label,
                    "degree": sub.nodes[entity].degree,
                    "frequency": sub.nodes[entity].frequency.get(doc_id, 0),
                    "central": entity in centrals,
                    "visible": entity in visible,
                }
                for entity in shown
            ],
            "edges": [
                {
                    "id": edge.edge_id,
                    "source": edge.endpoints[0],
                    "target": edge.endpoints[1],
                    "relations": len(edge.relations),
                }
                for _, edge in sorted(sub.edges.items())
                if edge.endpoints[0] in shown_set and edge.endpoints[1] in shown_set
            ],
        }

    @app.post("/api/graphs/{graph_id}/documents/{doc_id}/expand")
    def expand(graph_id: str, doc_id: str, body: ExpandRequest):
        artifact = graph_or_none(graph_id)
        if artifact is None:
            return _error(404, "unknown_graph")
        if doc_id not in artifact.corpus.documents:
            return _error(404, "unknown_document")
        with sessions_lock:
            session = sessions.get(body.session)
        if session is None:
            return _error(404, "unknown_session")
        sub = registry.subgraph(graph_id, doc_id)
        key = (graph_id, doc_id)
        with session.lock:
            if key not in session.visible:
                session.visible[key] = _initial_visible(artifact, graph_id, doc_id)
            try:
                session.visible[key] = expand_state(sub, session.visible[key], body.node)
            except UnknownEntityError:
                return _error(404, "unknown_node")
            except VisibilityStateError:
                return _error(409, "node_not_visible")
            return {"doc_id": doc_id, "visible": sorted(session.visible[key])}

    @app.get("/api/graphs/{graph_id}/edges/{edge_id}/relations")
    def edge_relations(graph_id: str, edge_id: str):
        artifact = graph_or_none(graph_id)
        if artifact is None:
            return _error(404, "unknown_graph")
        for _, edge in sorted(artifact.hkg.detail.edges.items()):
            if edge.edge_id == edge_id:
                return {
                    "id": edge.edge_id,
                    "source": edge.endpoints[0],
                    "target": edge.endpoints[1],
                    "relations": [
                        {
                            "relation": t.relation,
                            "snippet": t.snippet,
                            "doc_id": t.anchor.doc_id,
                            "start": t.anchor.start,
                            "end": t.anchor.end,
                            "salience": t.salience,
                        }
                        for t in edge.relations
                    ],
                }
        return _error(404, "unknown_edge")

    @app.get("/api/documents/{doc_id}/text")
    def document_text(doc_id: str):
        for graph_id in sorted(registry.graphs):
            corpus = registry.graphs[graph_id].corpus
            if doc_id in corpus.documents:
                doc = corpus.documents[doc_id]
                return {
                    "doc_id": doc.doc_id,
                    "title": doc.title,
                    "url": doc.source_url,
                    "body": doc.body,
                }
        return _error(404, "unknown_document")

    @app.post("/api/sessions")
    def create_session():
        session_id = uuid.uuid4().hex
        with sessions_lock:
            sessions[session_id] = SessionState(session_id=session_id, created_at=time.time())
        return {"session_id": session_id}

    @app.post("/api/events")
    def post_event(body: EventRequest):
        with sessions_lock:
            known = body.session in sessions
        if not known:
            return _error(404, "unknown_session")
        event = analytics.InteractionEvent(
            session=body.session, t_ms=body.t_ms, kind=body.kind, payload=body.payload
        )
        try:
            event_log.append(event)
        except OutOfOrderEventError:
            return _error(409, "event_out_of_order")
        except store.EventLogError as exc:
            return _error(422, "invalid_event", str(exc))
        return {"status": "ok"}

    @app.get("/api/sessions/{session_id}/metrics")
    def session_metrics(session_id: str):
        with sessions_lock:
            known = session_id in sessions
        if not known:
            return _error(404, "unknown_session")
        events = event_log.events(session=session_id)
        try:
            metrics = analytics.session_metrics(events)
        except analytics.AnalysisError as exc:
            return _error(422, "analysis_error", str(exc))
        return metrics.to_dict()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


@dataclass(frozen=True)
class ServerConfig:
    artifacts_dir: Path
    port: int = 8000
    log_path: Path = Path("events.jsonl")
    host: str = "127.0.0.1"
    hide_threshold: int = DEFAULT_HIDE_THRESHOLD
    ui_dir: Path | None = None


def serve(config: ServerConfig) -> None:
    """Load artifacts and run the service until interrupted."""
    import uvicorn

    registry = load_registry(config.artifacts_dir)
    event_log = EventLog(config.log_path)
    app = create_app(
        registry, event_log, hide_threshold=config.hide_threshold, ui_dir=config.ui_dir
    )
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
