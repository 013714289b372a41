"""Persistence: canonical JSON artifacts with content hashes, and event logs.

Artifacts are single JSON files wrapped in a versioned envelope whose
content hash is recomputed on load. Serialization is canonical (sorted
keys, floats at six significant digits, LF newlines) so that equal
artifacts always hash equally. Event logs are append-only JSON Lines,
one writer per file, durable on return.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .analytics import EVENT_KINDS, InteractionEvent
from .corpus import Corpus, Document, Partition
from .extraction import Tuple, TupleSet
from .graph import (
    CentralConcept,
    CentralConceptParams,
    Hkg,
    build_kg,
)
from .quality import DegradationSpec, QualityReport

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class StoreError(Exception):
    """Base class for persistence failures."""


class StorageWriteError(StoreError):
    """The target path cannot be written."""


class VersionMismatchError(StoreError):
    """The artifact was written with an incompatible format version."""


class CorruptArtifactError(StoreError):
    """The payload does not match its recorded content hash."""


class SchemaError(StoreError):
    """The payload does not match the schema for its kind."""


class EventLogError(StoreError):
    """An event cannot be appended or the log cannot be read."""


class OutOfOrderEventError(EventLogError):
    """An event's timestamp went backwards within its session."""


# --- canonical JSON ---------------------------------------------------------


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise StoreError("canonical JSON cannot encode NaN or infinity")
    text = format(x, ".6g")
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def _write_canonical(value, out: list[str]) -> None:
    if value is None or value is True or value is False:
        out.append("null" if value is None else ("true" if value else "false"))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _write_canonical(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise StoreError(f"canonical JSON requires string keys, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write_canonical(value[key], out)
        out.append("}")
    else:
        raise StoreError(f"cannot canonically encode {type(value).__name__}")


def canonical_json(value) -> str:
    """Deterministic JSON text: sorted keys, 6-significant-digit floats."""
    out: list[str] = []
    _write_canonical(value, out)
    return "".join(out)


def content_hash_of(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


# --- artifact types and codecs ----------------------------------------------


@dataclass(frozen=True)
class CorpusArtifact:
    corpus: Corpus


@dataclass(frozen=True)
class TupleSetArtifact:
    tuples: TupleSet


@dataclass(frozen=True)
class HkgArtifact:
    """A self-contained graph bundle: corpus, layers, and optional quality."""

    corpus: Corpus
    hkg: Hkg
    quality: QualityReport | None = None
    degradation: DegradationSpec | None = None


@dataclass(frozen=True)
class ReportArtifact:
    report: QualityReport


def _corpus_to_payload(corpus: Corpus) -> dict:
    return {
        "partitions": [
            {
                "id": part.partition_id,
                "query": part.query,
                "documents": [
                    {
                        "id": doc.doc_id,
                        "title": doc.title,
                        "url": doc.source_url,
                        "body": doc.body,
                        "sentence_spans": [list(span) for span in doc.sentence_spans],
                        "rank": doc.rank,
                    }
                    for doc in (corpus.documents[d] for d in part.documents)
                ],
            }
            for part in corpus.partitions
        ]
    }


def _corpus_from_payload(payload: dict) -> Corpus:
    documents: dict[str, Document] = {}
    partitions: list[Partition] = []
    for part in payload["partitions"]:
        doc_ids = []
        for entry in part["documents"]:
            doc = Document(
                doc_id=entry["id"],
                title=entry["title"],
                source_url=entry["url"],
                body=entry["body"],
                sentence_spans=tuple(tuple(span) for span in entry["sentence_spans"]),
                rank=entry["rank"],
                partition_id=part["id"],
            )
            documents[doc.doc_id] = doc
            doc_ids.append(doc.doc_id)
        partitions.append(Partition(part["id"], part["query"], tuple(doc_ids)))
    return Corpus(documents=documents, partitions=tuple(partitions))


def _tuples_to_payload(tuples: TupleSet) -> dict:
    return {"tuples": [t.to_dict() for t in tuples]}


def _tuples_from_payload(payload: dict) -> TupleSet:
    return TupleSet.from_iterable(Tuple.from_dict(d) for d in payload["tuples"])


def _hkg_to_payload(artifact: HkgArtifact) -> dict:
    hkg = artifact.hkg
    detail = hkg.detail
    return {
        "corpus": _corpus_to_payload(artifact.corpus),
        "params": {
            "min_degree": hkg.params.min_degree,
            "max_count": hkg.params.max_count,
            "relax_ties": hkg.params.relax_ties,
        },
        "detail": {
            "nodes": [
                {
                    "entity": node.entity,
                    "label": node.label,
                    "degree": node.degree,
                    "frequency": dict(node.frequency),
                }
                for _, node in sorted(detail.nodes.items())
            ],
            "edges": [
                {
                    "id": edge.edge_id,
                    "source": edge.endpoints[0],
                    "target": edge.endpoints[1],
                    "relations": [t.to_dict() for t in edge.relations],
                }
                for _, edge in sorted(detail.edges.items())
            ],
        },
        "minimaps": {
            doc_id: [
                {"entity": c.entity, "degree": c.degree, "frequency": c.frequency}
                for c in concepts
            ]
            for doc_id, concepts in hkg.minimaps.items()
        },
        "mappings": {
            doc_id: {entity: list(targets) for entity, targets in doc_map.items()}
            for doc_id, doc_map in hkg.mappings.items()
        },
        "quality": artifact.quality.to_dict() if artifact.quality else None,
        "degradation": artifact.degradation.to_dict() if artifact.degradation else None,
    }


def _hkg_from_payload(payload: dict) -> HkgArtifact:
    corpus = _corpus_from_payload(payload["corpus"])
    params = CentralConceptParams(
        min_degree=payload["params"]["min_degree"],
        max_count=payload["params"]["max_count"],
        relax_ties=payload["params"].get("relax_ties", False),
    )
    all_tuples = [
        Tuple.from_dict(d) for edge in payload["detail"]["edges"] for d in edge["relations"]
    ]
    detail = build_kg(TupleSet.from_iterable(all_tuples))
    minimaps = {
        doc_id: tuple(
            CentralConcept(entity=c["entity"], degree=c["degree"], frequency=c["frequency"])
            for c in concepts
        )
        for doc_id, concepts in payload["minimaps"].items()
    }
    mappings = {
        doc_id: {entity: tuple(targets) for entity, targets in doc_map.items()}
        for doc_id, doc_map in payload["mappings"].items()
    }
    hkg = Hkg(
        collection=corpus.partitions,
        minimaps=minimaps,
        detail=detail,
        mappings=mappings,
        params=params,
    )
    quality = QualityReport.from_dict(payload["quality"]) if payload.get("quality") else None
    degradation = (
        DegradationSpec.from_dict(payload["degradation"]) if payload.get("degradation") else None
    )
    return HkgArtifact(corpus=corpus, hkg=hkg, quality=quality, degradation=degradation)


_CODECS = {
    "corpus": (
        CorpusArtifact,
        lambda a: _corpus_to_payload(a.corpus),
        lambda p: CorpusArtifact(_corpus_from_payload(p)),
    ),
    "tuples": (
        TupleSetArtifact,
        lambda a: _tuples_to_payload(a.tuples),
        lambda p: TupleSetArtifact(_tuples_from_payload(p)),
    ),
    "hkg": (HkgArtifact, _hkg_to_payload, _hkg_from_payload),
    "report": (
        ReportArtifact,
        lambda a: a.report.to_dict(),
        lambda p: ReportArtifact(QualityReport.from_dict(p)),
    ),
}

Artifact = CorpusArtifact | TupleSetArtifact | HkgArtifact | ReportArtifact


def kind_of(artifact: Artifact) -> str:
    for kind, (cls, _, _) in _CODECS.items():
        if isinstance(artifact, cls):
            return kind
    raise StoreError(f"unknown artifact type {type(artifact).__name__}")


def save(artifact: Artifact, path: str | Path) -> str:
    """Write an artifact atomically; returns the payload content hash."""
    path = Path(path)
    kind = kind_of(artifact)
    _, to_payload, _ = _CODECS[kind]
    payload = to_payload(artifact)
    digest = content_hash_of(payload)
    envelope = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "content_hash": digest,
        "payload": payload,
    }
    text = canonical_json(envelope) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
    except OSError as exc:
        raise StorageWriteError(f"cannot write artifact to {path}: {exc}") from exc
    return digest


def load(path: str | Path) -> Artifact:
    """Read an artifact, verifying format version, hash, and schema."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read artifact {path}: {exc}") from exc
    try:
        envelope = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptArtifactError(f"artifact {path} is not valid JSON: {exc}") from exc
    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"artifact {path} has format_version {version}, this build supports {FORMAT_VERSION}"
        )
    kind = envelope.get("kind")
    if kind not in _CODECS:
        raise SchemaError(f"artifact {path} has unknown kind {kind!r}")
    payload = envelope.get("payload")
    recomputed = content_hash_of(payload)
    if recomputed != envelope.get("content_hash"):
        raise CorruptArtifactError(
            f"artifact {path} failed hash verification "
            f"(recorded {envelope.get('content_hash')}, recomputed {recomputed})"
        )
    _, _, from_payload = _CODECS[kind]
    try:
        return from_payload(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"artifact {path} payload does not match kind {kind!r}: {exc}") from exc


# --- event log ---------------------------------------------------------------


def event_line(event: InteractionEvent) -> str:
    """One JSON line, fixed top-level key order, sorted payload keys."""
    return json.dumps(event.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"


class EventLog:
    """Append-only JSON Lines event log with per-session monotonic clocks.

    One writer per file; concurrent readers are safe. A crashed writer
    leaves at most one truncated trailing line, which readers drop.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._last_t: dict[str, int] = {}
        if self.path.exists():
            for event in read_events(self.path):
                self._last_t[event.session] = max(
                    self._last_t.get(event.session, 0), event.t_ms
                )

    def append(self, event: InteractionEvent) -> None:
        if event.kind not in EVENT_KINDS:
            raise EventLogError(f"unknown event kind {event.kind!r}")
        last = self._last_t.get(event.session)
        if last is not None and event.t_ms < last:
            raise OutOfOrderEventError(
                f"session {event.session!r}: t_ms {event.t_ms} precedes {last}"
            )
        line = event_line(event)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageWriteError(f"cannot append to event log {self.path}: {exc}") from exc
        self._last_t[event.session] = event.t_ms

    def events(self, session: str | None = None) -> list[InteractionEvent]:
        if not self.path.exists():
            return []
        events = read_events(self.path)
        if session is not None:
            events = [e for e in events if e.session == session]
        return events


def append_event(log: EventLog | str | Path, event: InteractionEvent) -> None:
    """Append one event; accepts an open log or a path (opened per call)."""
    if not isinstance(log, EventLog):
        log = EventLog(log)
    log.append(event)


def read_events(path: str | Path) -> list[InteractionEvent]:
    """Parse a JSON Lines event log; a truncated final line is dropped."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EventLogError(f"cannot read event log {path}: {exc}") from exc
    lines = raw.split("\n")
    trailing_complete = raw.endswith("\n")
    events: list[InteractionEvent] = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            events.append(InteractionEvent.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            last_content_line = i == len(lines) - 1 and not trailing_complete
            if last_content_line:
                logger.warning("dropping truncated trailing line in %s", path)
                continue
            raise EventLogError(f"event log {path} line {i + 1} is invalid: {exc}") from exc
    return events
