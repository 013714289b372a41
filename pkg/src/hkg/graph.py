"""Knowledge graph topology and the three-layer hierarchical structure.

Layers: the document collection on top, per-document minimaps of central
concepts in the middle, and the full entity-relation graph at the bottom,
with mappings tying each central concept to the detail nodes it anchors.
Layout is the UI's job; this module ships topology only.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Corpus, Partition
from .extraction import Tuple, TupleSet


class GraphError(Exception):
    """Base class for graph construction and query failures."""


class UnknownDocumentError(GraphError, LookupError):
    """A document id is not present in the graph."""


class UnknownEntityError(GraphError, LookupError):
    """An entity id is not present in the graph."""


class VisibilityStateError(GraphError):
    """An interaction referenced a node outside the visible set."""


@dataclass
class KgNode:
    """Graph node: entity id, display label, degree, per-document frequency."""

    entity: str
    label: str
    degree: int = 0
    frequency: dict[str, int] = field(default_factory=dict)


@dataclass
class KgEdge:
    """Unordered entity pair aggregating every relation between the two."""

    endpoints: tuple[str, str]
    relations: tuple[Tuple, ...]

    @property
    def edge_id(self) -> str:
        return edge_id(*self.endpoints)


def edge_id(a: str, b: str) -> str:
    """Stable, URL-safe identifier for an unordered entity pair."""
    lo, hi = (a, b) if a <= b else (b, a)
    digest = hashlib.sha256(f"{lo}\x1f{hi}".encode("utf-8")).hexdigest()
    return digest[:12]


@dataclass
class KnowledgeGraph:
    """Entities as nodes, entity pairs as relation-carrying edges.

    Treat as immutable after construction; shared across readers.
    """

    nodes: dict[str, KgNode] = field(default_factory=dict)
    edges: dict[tuple[str, str], KgEdge] = field(default_factory=dict)

    def neighbors(self, entity: str) -> set[str]:
        if entity not in self.nodes:
            raise UnknownEntityError(f"unknown entity {entity!r}")
        out: set[str] = set()
        for a, b in self.edges:
            if a == entity:
                out.add(b)
            elif b == entity:
                out.add(a)
        return out

    def doc_ids(self) -> set[str]:
        """Documents referenced by any edge anchor or node frequency."""
        docs: set[str] = set()
        for edge in self.edges.values():
            docs.update(t.anchor.doc_id for t in edge.relations)
        for node in self.nodes.values():
            docs.update(node.frequency)
        return docs

    def edge_by_id(self, eid: str) -> KgEdge:
        for edge in self.edges.values():
            if edge.edge_id == eid:
                return edge
        raise GraphError(f"unknown edge id {eid!r}")

    def tuples(self) -> TupleSet:
        """All relation evidence in canonical order."""
        items: list[Tuple] = []
        for edge in self.edges.values():
            items.extend(edge.relations)
        return TupleSet.from_iterable(items)


def build_kg(tuples: TupleSet | Iterable[Tuple]) -> KnowledgeGraph:
    """Aggregate tuples into a knowledge graph.

    One node per entity, one edge per unordered pair; a node's per-document
    frequency counts the tuples anchored in that document that involve it.
    """
    by_pair: dict[tuple[str, str], list[Tuple]] = {}
    for t in tuples:
        by_pair.setdefault(t.pair(), []).append(t)

    nodes: dict[str, KgNode] = {}
    edges: dict[tuple[str, str], KgEdge] = {}
    freq: Counter[tuple[str, str]] = Counter()
    for pair in sorted(by_pair):
        deduped: dict[tuple, Tuple] = {}
        for t in by_pair[pair]:
            deduped.setdefault((t.relation, t.anchor.key()), t)
        relations = tuple(sorted(deduped.values(), key=Tuple.sort_key))
        edges[pair] = KgEdge(endpoints=pair, relations=relations)
        for entity in pair:
            nodes.setdefault(entity, KgNode(entity=entity, label=entity))
            nodes[entity].degree += 1
        for t in relations:
            freq[(t.entity1, t.anchor.doc_id)] += 1
            freq[(t.entity2, t.anchor.doc_id)] += 1
    for (entity, doc_id), count in freq.items():
        nodes[entity].frequency[doc_id] = nodes[entity].frequency.get(doc_id, 0) + count
    return KnowledgeGraph(nodes=nodes, edges=edges)


def document_subgraph(
    kg: KnowledgeGraph, doc_id: str, *, missing_ok: bool = False
) -> KnowledgeGraph:
    """Subgraph induced by edges with at least one relation anchored in ``doc_id``.

    Node degrees are recomputed within the subgraph; edges keep their full
    relation lists.
    """
    if not missing_ok and doc_id not in kg.doc_ids():
        raise UnknownDocumentError(f"unknown document {doc_id!r}")
    edges: dict[tuple[str, str], KgEdge] = {}
    nodes: dict[str, KgNode] = {}
    for pair, edge in kg.edges.items():
        if any(t.anchor.doc_id == doc_id for t in edge.relations):
            edges[pair] = edge
            for entity in pair:
                if entity not in nodes:
                    src = kg.nodes[entity]
                    nodes[entity] = KgNode(
                        entity=entity, label=src.label, degree=0, frequency=dict(src.frequency)
                    )
                nodes[entity].degree += 1
    return KnowledgeGraph(nodes=nodes, edges=edges)


@dataclass(frozen=True)
class CentralConceptParams:
    """Thresholding knobs for the central-concept sweep."""

    min_degree: int = 3
    max_count: int = 15
    relax_ties: bool = False

    def __post_init__(self) -> None:
        if self.min_degree < 1:
            raise GraphError("min_degree must be >= 1")
        if self.max_count < 0:
            raise GraphError("max_count must be >= 0")


@dataclass(frozen=True)
class CentralConcept:
    """A high-degree entity surfaced in a document's minimap."""

    entity: str
    degree: int
    frequency: int = 0


def extract_central_concepts(
    nodes: Sequence[tuple[str, int]],
    params: CentralConceptParams | None = None,
) -> list[CentralConcept]:
    """Select central concepts by iterative degree thresholding.

    Starting at ``min_degree``, collect all nodes at or above the threshold;
    if no more than ``max_count`` qualify, return them, otherwise raise the
    threshold by one and retry. When more than ``max_count`` nodes share the
    top degree the sweep collapses to an empty result; ``relax_ties``
    instead returns the ``max_count`` highest-degree qualifying nodes.
    Results are sorted by (degree desc, entity asc).
    """
    params = params or CentralConceptParams()

    def sort_key(pair: tuple[str, int]) -> tuple[int, str]:
        return (-pair[1], pair[0])

    if params.relax_ties:
        qualifying = sorted(
            ((e, d) for e, d in nodes if d >= params.min_degree), key=sort_key
        )
        chosen = qualifying[: params.max_count]
        return [CentralConcept(entity=e, degree=d) for e, d in chosen]
    threshold = params.min_degree
    while True:
        central = [(e, d) for e, d in nodes if d >= threshold]
        if len(central) <= params.max_count:
            return [CentralConcept(entity=e, degree=d) for e, d in sorted(central, key=sort_key)]
        threshold += 1


@dataclass
class Hkg:
    """The three synchronized layers plus cross-layer mappings."""

    collection: tuple[Partition, ...]
    minimaps: dict[str, tuple[CentralConcept, ...]]
    detail: KnowledgeGraph
    mappings: dict[str, dict[str, tuple[str, ...]]]
    params: CentralConceptParams


def build_hkg(
    corpus: Corpus,
    tuples: TupleSet,
    params: CentralConceptParams | None = None,
) -> Hkg:
    """Assemble the hierarchical structure from a corpus and its tuples.

    Central concepts are computed per document subgraph; each concept maps
    to its closed neighborhood within that subgraph.
    """
    params = params or CentralConceptParams()
    detail = build_kg(tuples)
    minimaps: dict[str, tuple[CentralConcept, ...]] = {}
    mappings: dict[str, dict[str, tuple[str, ...]]] = {}
    for doc in corpus.ordered_documents():
        sub = document_subgraph(detail, doc.doc_id, missing_ok=True)
        degree_list = [(n.entity, n.degree) for n in sub.nodes.values()]
        concepts = extract_central_concepts(degree_list, params)
        minimaps[doc.doc_id] = tuple(
            CentralConcept(
                entity=c.entity,
                degree=c.degree,
                frequency=detail.nodes[c.entity].frequency.get(doc.doc_id, 0),
            )
            for c in concepts
        )
        doc_map: dict[str, tuple[str, ...]] = {}
        for c in concepts:
            anchored = {c.entity} | sub.neighbors(c.entity)
            doc_map[c.entity] = tuple(sorted(anchored))
        mappings[doc.doc_id] = doc_map
    return Hkg(
        collection=corpus.partitions,
        minimaps=minimaps,
        detail=detail,
        mappings=mappings,
        params=params,
    )


def visible_nodes(
    kg: KnowledgeGraph,
    doc_id: str,
    hide_threshold: int,
    central_concepts: Iterable[str] = (),
) -> set[str]:
    """Initial visible set: frequent-enough nodes plus all central concepts."""
    if hide_threshold < 0:
        raise GraphError("hide_threshold must be >= 0")
    visible = {
        n.entity for n in kg.nodes.values() if n.frequency.get(doc_id, 0) >= hide_threshold
    }
    visible.update(c for c in central_concepts if c in kg.nodes)
    return visible


@dataclass(frozen=True)
class FocusView:
    """Partition of the node set into saturated and alpha-blended nodes."""

    saturated: frozenset[str]
    blended: frozenset[str]


def focus_filter(kg: KnowledgeGraph, concept: str) -> FocusView:
    """Saturate a concept's closed neighborhood; blend everything else."""
    if concept not in kg.nodes:
        raise UnknownEntityError(f"unknown concept {concept!r}")
    saturated = {concept} | kg.neighbors(concept)
    blended = set(kg.nodes) - saturated
    return FocusView(saturated=frozenset(saturated), blended=frozenset(blended))


def expand_state(kg: KnowledgeGraph, visible: set[str], clicked: str) -> set[str]:
    """Toggle a clicked node's neighborhood.

    If the node has hidden neighbors they all become visible (expand).
    Otherwise its neighbors that have no visible anchor besides the clicked
    node are hidden again (collapse). The clicked node always stays visible.
    """
    if clicked not in visible:
        raise VisibilityStateError(f"clicked node {clicked!r} is not visible")
    neighbors = kg.neighbors(clicked)
    hidden = neighbors - visible
    if hidden:
        return visible | neighbors
    removable = {
        n for n in neighbors if not (kg.neighbors(n) & (visible - {clicked}))
    }
    return (visible - removable) | {clicked}
