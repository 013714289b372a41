"""Document collections: loading, sentence segmentation, partitioning, retrieval.

A corpus is a set of plain-text documents grouped into partitions, one
partition per query. Live web retrieval is replaced by a local
term-frequency index so that every downstream artifact is reproducible.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

_TERMINATORS = ".!?"
_WORD_RE = re.compile(r"[a-z0-9']+")


class CorpusError(Exception):
    """Base class for corpus loading and validation failures."""


class CorpusLoadError(CorpusError):
    """A manifest or document file is missing or unreadable."""


class CorpusValidationError(CorpusError):
    """Manifest contents violate a corpus invariant (e.g. duplicate ids)."""


def sentence_spans(text: str) -> tuple[tuple[int, int], ...]:
    """Split ``text`` into sentence spans of (start, end) character offsets.

    A sentence ends at '.', '!' or '?' when the terminator run is followed
    by whitespace and an uppercase letter, or by end-of-text. Abbreviations
    are not special-cased; the rule is deterministic by design.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    start: int | None = None
    i = 0
    while i < n:
        ch = text[i]
        if start is None:
            if not ch.isspace():
                start = i
            i += 1
            continue
        if ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j] in _TERMINATORS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k == n:
                spans.append((start, j))
                start = None
                i = k
            elif k > j and text[k].isupper():
                spans.append((start, j))
                start = None
                i = k
            else:
                i = j
        else:
            i += 1
    if start is not None:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        spans.append((start, end))
    return tuple(spans)


@dataclass(frozen=True)
class Document:
    """One retrieved document with precomputed sentence segmentation."""

    doc_id: str
    title: str
    source_url: str
    body: str
    sentence_spans: tuple[tuple[int, int], ...]
    rank: int
    partition_id: str

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise CorpusValidationError(f"document {self.doc_id!r}: rank must be >= 1")
        prev_end = 0
        for s, e in self.sentence_spans:
            if not (0 <= s < e <= len(self.body)):
                raise CorpusValidationError(
                    f"document {self.doc_id!r}: span ({s}, {e}) outside body"
                )
            if s < prev_end:
                raise CorpusValidationError(
                    f"document {self.doc_id!r}: spans overlap or are unsorted"
                )
            prev_end = e

    @classmethod
    def from_text(
        cls,
        doc_id: str,
        title: str,
        body: str,
        *,
        source_url: str = "",
        rank: int = 1,
        partition_id: str = "",
    ) -> "Document":
        """Build a document, computing sentence spans from the body."""
        return cls(
            doc_id=doc_id,
            title=title,
            source_url=source_url,
            body=body,
            sentence_spans=sentence_spans(body),
            rank=rank,
            partition_id=partition_id,
        )

    def sentence(self, index: int) -> str:
        s, e = self.sentence_spans[index]
        return self.body[s:e]


@dataclass(frozen=True)
class Partition:
    """One query's slice of the corpus; documents ordered by rank."""

    partition_id: str
    query: str
    documents: tuple[str, ...]


@dataclass(frozen=True)
class RetrievalConfig:
    """Retrieval knobs: at most ``n`` documents, restricted to a domain."""

    n: int = 10
    domain_filter: str = "wikipedia"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise CorpusValidationError("retrieval config: n must be >= 1")


@dataclass(frozen=True)
class Corpus:
    """Immutable document collection. Safe to share across readers."""

    documents: dict[str, Document] = field(default_factory=dict)
    partitions: tuple[Partition, ...] = ()

    def __len__(self) -> int:
        return len(self.documents)

    def ordered_documents(self) -> list[Document]:
        """Documents in canonical order: partition order, then rank."""
        out: list[Document] = []
        for part in self.partitions:
            out.extend(self.documents[d] for d in part.documents)
        return out


def load_corpus(manifest_path: str | Path) -> Corpus:
    """Load a corpus from a JSON manifest.

    Manifest schema::

        {"partitions": [{"id": str, "query": str,
                         "documents": [{"id": str, "title": str,
                                        "url": str, "path": str}]}]}

    Document paths are resolved relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    try:
        raw = manifest_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusLoadError(f"cannot read manifest {manifest_path}: {exc}") from exc
    try:
        manifest = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorpusLoadError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc

    base = manifest_path.parent
    documents: dict[str, Document] = {}
    partitions: list[Partition] = []
    for part in manifest.get("partitions", []):
        part_id = part["id"]
        doc_ids: list[str] = []
        for rank, entry in enumerate(part.get("documents", []), start=1):
            doc_id = entry["id"]
            if doc_id in documents:
                raise CorpusValidationError(f"duplicate doc_id {doc_id!r} in manifest")
            doc_path = base / entry["path"]
            try:
                body = doc_path.read_text(encoding="utf-8")
            except OSError as exc:
                raise CorpusLoadError(f"cannot read document file {doc_path}: {exc}") from exc
            documents[doc_id] = Document.from_text(
                doc_id,
                entry.get("title", doc_id),
                body,
                source_url=entry.get("url", ""),
                rank=rank,
                partition_id=part_id,
            )
            doc_ids.append(doc_id)
        if not doc_ids:
            logger.warning("partition %r is empty; retained", part_id)
        partitions.append(Partition(part_id, part.get("query", ""), tuple(doc_ids)))
    return Corpus(documents=documents, partitions=tuple(partitions))


def _tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.casefold())


class SearchIndex:
    """Term-frequency index over titles and bodies of a corpus.

    Stands in for a web search engine: scoring is the sum of query-term
    frequencies, ties broken by lexicographic doc_id.
    """

    def __init__(self, corpus: Corpus) -> None:
        self._corpus = corpus
        self._tf: dict[str, Counter[str]] = {}
        for doc in corpus.documents.values():
            self._tf[doc.doc_id] = Counter(_tokenize(doc.title) + _tokenize(doc.body))

    def score(self, query: str, doc_id: str) -> int:
        tf = self._tf[doc_id]
        return sum(tf[term] for term in _tokenize(query))

    def corpus(self) -> Corpus:
        return self._corpus


def _slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.casefold()).strip("-")
    return slug or "query"


def retrieve(query: str, cfg: RetrievalConfig, index: SearchIndex) -> Partition:
    """Rank documents for ``query`` and return the top ``cfg.n`` as a partition.

    Documents whose source URL does not contain ``cfg.domain_filter`` are
    excluded before ranking; documents with zero score do not match. An
    empty result is a valid, empty partition.
    """
    domain = cfg.domain_filter.casefold()
    scored: list[tuple[int, str]] = []
    for doc in index.corpus().documents.values():
        if domain and domain not in doc.source_url.casefold():
            continue
        s = index.score(query, doc.doc_id)
        if s > 0:
            scored.append((s, doc.doc_id))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    top = tuple(doc_id for _, doc_id in scored[: cfg.n])
    return Partition(partition_id=_slugify(query), query=query, documents=top)
