"""Tuple extraction: documents in, (entity1, entity2, relation, snippet, anchor) out.

The built-in extractor is deliberately simple and fully deterministic:
entity mentions come from a gazetteer plus a capitalized-token heuristic,
relations are the connecting text span between two mentions, and an alias
table performs the mechanizable part of co-reference cleanup. A
parser-backed extractor can be swapped in behind :class:`Extractor`.
"""

from __future__ import annotations

import hashlib
import json
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Protocol

from .corpus import Corpus, Document

# Fixed 50-word list used only to suppress sentence-initial capitalization.
STOPWORDS = frozenset(
    """
    the a an and or but if then this that these those it its he she they we
    you i in on at by for with from to of as is are was were be been being
    have has had do does did not no so such there their his
    """.split()
)

_EDGE_CHARS = string.punctuation + "“”‘’"
_TOKEN_RE = re.compile(r"\S+")


class ExtractionError(Exception):
    """Base class for extraction failures."""


class NormalizationError(ExtractionError):
    """A surface form has no normalizable content (all punctuation)."""


@dataclass(frozen=True)
class AliasTable:
    """Surface-form to canonical-id map; the residue of hand tuning.

    Keys are stored normalized (case-folded, whitespace-collapsed,
    punctuation-stripped at the edges). The mapping must be a function.
    """

    mapping: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_raw(cls, raw: dict[str, str]) -> "AliasTable":
        normalized: dict[str, str] = {}
        for surface, canonical in raw.items():
            key = _normalize_text(surface)
            if key in normalized and normalized[key] != canonical:
                raise ExtractionError(
                    f"alias table maps {key!r} to both {normalized[key]!r} and {canonical!r}"
                )
            normalized[key] = canonical
        return cls(normalized)

    def get(self, key: str) -> str | None:
        return self.mapping.get(key)


@dataclass(frozen=True)
class EntityMention:
    """One occurrence of an entity in a document sentence."""

    surface: str
    canonical_id: str
    doc_id: str
    sentence_index: int
    span: tuple[int, int]


@dataclass(frozen=True)
class Anchor:
    """Location of a source sentence: document plus character span."""

    doc_id: str
    start: int
    end: int

    def key(self) -> tuple[str, int, int]:
        return (self.doc_id, self.start, self.end)


@dataclass(frozen=True)
class Tuple:
    """The atom of the system: two entities, a relation, and its provenance."""

    entity1: str
    entity2: str
    relation: str
    snippet: str
    anchor: Anchor
    salience: int = 0

    def __post_init__(self) -> None:
        if self.entity1 == self.entity2:
            raise ExtractionError(f"degenerate tuple: entity1 == entity2 == {self.entity1!r}")
        if self.salience < 0:
            raise ExtractionError("tuple salience must be >= 0")

    def pair(self) -> tuple[str, str]:
        """Unordered entity pair as a sorted tuple."""
        a, b = self.entity1, self.entity2
        return (a, b) if a <= b else (b, a)

    def sort_key(self) -> tuple:
        return (self.anchor.doc_id, self.anchor.start, self.entity1, self.entity2, self.relation)

    def to_dict(self) -> dict:
        return {
            "entity1": self.entity1,
            "entity2": self.entity2,
            "relation": self.relation,
            "snippet": self.snippet,
            "anchor": {"doc_id": self.anchor.doc_id, "start": self.anchor.start, "end": self.anchor.end},
            "salience": self.salience,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tuple":
        a = d["anchor"]
        return cls(
            entity1=d["entity1"],
            entity2=d["entity2"],
            relation=d["relation"],
            snippet=d["snippet"],
            anchor=Anchor(a["doc_id"], a["start"], a["end"]),
            salience=d.get("salience", 0),
        )


@dataclass(frozen=True)
class TupleSet:
    """Canonically ordered, deduplicated collection of tuples."""

    tuples: tuple[Tuple, ...] = ()

    @classmethod
    def from_iterable(cls, items: Iterable[Tuple]) -> "TupleSet":
        """Deduplicate on (entity1, entity2, relation, anchor) and sort."""
        seen: dict[tuple, Tuple] = {}
        for t in items:
            key = (t.entity1, t.entity2, t.relation, t.anchor.key())
            seen.setdefault(key, t)
        return cls(tuple(sorted(seen.values(), key=Tuple.sort_key)))

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def entities(self) -> list[str]:
        """All entity ids, sorted."""
        ids = {t.entity1 for t in self.tuples} | {t.entity2 for t in self.tuples}
        return sorted(ids)

    def pairs(self) -> set[tuple[str, str]]:
        return {t.pair() for t in self.tuples}

    def to_jsonl(self) -> str:
        lines = [json.dumps(t.to_dict(), ensure_ascii=False, sort_keys=True) for t in self.tuples]
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, text: str) -> "TupleSet":
        tuples = [Tuple.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
        return cls.from_iterable(tuples)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode("utf-8")).hexdigest()


def _normalize_text(surface: str) -> str:
    """Case-fold, collapse whitespace, strip punctuation at the edges."""
    collapsed = " ".join(surface.casefold().split())
    return collapsed.strip(_EDGE_CHARS)


def normalize_entity(surface: str, aliases: AliasTable) -> str:
    """Normalize a surface form and resolve it through the alias table."""
    if not surface:
        raise NormalizationError("empty surface form")
    normalized = _normalize_text(surface)
    if not normalized:
        raise NormalizationError(f"surface {surface!r} has no normalizable content")
    mapped = aliases.get(normalized)
    return mapped if mapped is not None else normalized


@dataclass(frozen=True)
class _Token:
    start: int  # core offsets within the document body
    end: int
    core: str

    @property
    def folded(self) -> str:
        return self.core.casefold()

    @property
    def capitalized(self) -> bool:
        return bool(self.core) and self.core[0].isupper()


def _sentence_tokens(body: str, span: tuple[int, int]) -> list[_Token]:
    tokens: list[_Token] = []
    s, e = span
    for m in _TOKEN_RE.finditer(body, s, e):
        ts, te = m.start(), m.end()
        while ts < te and body[ts] in _EDGE_CHARS:
            ts += 1
        while te > ts and body[te - 1] in _EDGE_CHARS:
            te -= 1
        if ts < te:
            tokens.append(_Token(ts, te, body[ts:te]))
    return tokens


class _GazetteerMatcher:
    """Longest-match lookup of normalized gazetteer entries over token runs."""

    def __init__(self, entries: Iterable[str]) -> None:
        self._by_first: dict[str, list[tuple[str, ...]]] = {}
        for entry in entries:
            words = tuple(_normalize_text(entry).split())
            if not words:
                continue
            self._by_first.setdefault(words[0], []).append(words)
        for runs in self._by_first.values():
            runs.sort(key=len, reverse=True)

    def longest_at(self, tokens: list[_Token], i: int) -> int:
        """Number of tokens matched by the longest entry starting at i (0 if none)."""
        candidates = self._by_first.get(tokens[i].folded, ())
        for words in candidates:
            if i + len(words) > len(tokens):
                continue
            if all(tokens[i + k].folded == words[k] for k in range(len(words))):
                return len(words)
        return 0


def extract_mentions(
    doc: Document, gazetteer: Iterable[str], aliases: AliasTable
) -> list[EntityMention]:
    """Find entity mentions in every sentence of ``doc``.

    Candidates are maximal gazetteer matches plus maximal runs of
    capitalized tokens (sentence-initial stopwords excluded). Overlaps are
    resolved longest-match-first; output is sorted by span start.
    """
    matcher = _GazetteerMatcher(gazetteer)
    mentions: list[EntityMention] = []
    for sent_idx, span in enumerate(doc.sentence_spans):
        tokens = _sentence_tokens(doc.body, span)
        candidates: list[tuple[int, int]] = []
        i = 0
        while i < len(tokens):
            matched = matcher.longest_at(tokens, i)
            if matched:
                candidates.append((tokens[i].start, tokens[i + matched - 1].end))
                i += matched
            else:
                i += 1
        i = 0
        while i < len(tokens):
            if not tokens[i].capitalized or (i == 0 and tokens[i].folded in STOPWORDS):
                i += 1
                continue
            j = i
            while j + 1 < len(tokens) and tokens[j + 1].capitalized:
                j += 1
            candidates.append((tokens[i].start, tokens[j].end))
            i = j + 1
        accepted = _resolve_overlaps(candidates)
        for start, end in accepted:
            surface = doc.body[start:end]
            mentions.append(
                EntityMention(
                    surface=surface,
                    canonical_id=normalize_entity(surface, aliases),
                    doc_id=doc.doc_id,
                    sentence_index=sent_idx,
                    span=(start, end),
                )
            )
    mentions.sort(key=lambda m: m.span)
    return mentions


def _resolve_overlaps(candidates: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Greedy longest-match-first selection of non-overlapping spans."""
    unique = sorted(set(candidates), key=lambda c: (-(c[1] - c[0]), c[0]))
    accepted: list[tuple[int, int]] = []
    for start, end in unique:
        if all(end <= s or start >= e for s, e in accepted):
            accepted.append((start, end))
    return sorted(accepted)


def select_sentences(doc: Document, mentions: list[EntityMention]) -> list[int]:
    """Indices of sentences containing at least two distinct entities."""
    ids_per_sentence: dict[int, set[str]] = {}
    for m in mentions:
        if m.doc_id != doc.doc_id:
            raise ExtractionError(f"mention {m.surface!r} does not belong to {doc.doc_id!r}")
        ids_per_sentence.setdefault(m.sentence_index, set()).add(m.canonical_id)
    return sorted(idx for idx, ids in ids_per_sentence.items() if len(ids) >= 2)


def extract_tuples(
    doc: Document,
    sentence_index: int,
    mentions: list[EntityMention],
    mention_counts: dict[str, int] | None = None,
) -> list[Tuple]:
    """Emit one tuple per unordered pair of distinct entities in a sentence.

    The relation is the document text from the start of the earlier mention
    to the end of the later mention; salience is the document-level mention
    count of the two entities (``mention_counts``; falls back to counts
    within the given mentions).
    """
    in_sentence = [m for m in mentions if m.sentence_index == sentence_index]
    if mention_counts is None:
        mention_counts = Counter(m.canonical_id for m in mentions)
    first: dict[str, EntityMention] = {}
    for m in sorted(in_sentence, key=lambda m: m.span):
        first.setdefault(m.canonical_id, m)
    span = doc.sentence_spans[sentence_index]
    snippet = doc.body[span[0] : span[1]]
    ordered_ids = sorted(first, key=lambda cid: first[cid].span)
    tuples: list[Tuple] = []
    for id_a, id_b in combinations(ordered_ids, 2):
        m_a, m_b = first[id_a], first[id_b]
        earlier, later = (m_a, m_b) if m_a.span <= m_b.span else (m_b, m_a)
        relation = doc.body[earlier.span[0] : later.span[1]].strip()
        tuples.append(
            Tuple(
                entity1=earlier.canonical_id,
                entity2=later.canonical_id,
                relation=relation,
                snippet=snippet,
                anchor=Anchor(doc.doc_id, span[0], span[1]),
                salience=mention_counts[id_a] + mention_counts[id_b],
            )
        )
    return tuples


class Extractor(Protocol):
    """Anything that turns a corpus into a tuple set."""

    def __call__(self, corpus: Corpus) -> TupleSet: ...


@dataclass(frozen=True)
class HeuristicExtractor:
    """The built-in gazetteer + capitalization extractor."""

    gazetteer: frozenset[str] = frozenset()
    aliases: AliasTable = field(default_factory=AliasTable)

    def __call__(self, corpus: Corpus) -> TupleSet:
        return run_pipeline(corpus, self.gazetteer, self.aliases)


def run_pipeline(
    corpus: Corpus, gazetteer: Iterable[str], aliases: AliasTable
) -> TupleSet:
    """Extract tuples from every document; deterministic for equal inputs."""
    gazetteer = frozenset(gazetteer)
    all_tuples: list[Tuple] = []
    for doc_id in sorted(corpus.documents):
        doc = corpus.documents[doc_id]
        try:
            mentions = extract_mentions(doc, gazetteer, aliases)
            counts = Counter(m.canonical_id for m in mentions)
            for sent_idx in select_sentences(doc, mentions):
                all_tuples.extend(extract_tuples(doc, sent_idx, mentions, counts))
        except ExtractionError as exc:
            raise ExtractionError(f"document {doc_id!r}: {exc}") from exc
    return TupleSet.from_iterable(all_tuples)


def load_gazetteer(path: str | Path) -> tuple[frozenset[str], AliasTable]:
    """Read a gazetteer file: ``{"entities": [...], "aliases": {...}}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    entities = frozenset(_normalize_text(e) for e in data.get("entities", []))
    aliases = AliasTable.from_raw(data.get("aliases", {}))
    return entities, aliases
