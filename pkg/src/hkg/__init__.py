"""Hierarchical knowledge graphs for exploratory search.

Pipeline: load a document corpus, extract entity-relation tuples, build a
three-layer graph (collection, per-document central-concept minimaps,
detailed entity graph), serve it over HTTP, measure interaction logs, and
synthesize degraded graph variants at target precision/recall.
"""

from .corpus import (
    Corpus,
    Document,
    Partition,
    RetrievalConfig,
    SearchIndex,
    load_corpus,
    retrieve,
    sentence_spans,
)
from .extraction import (
    AliasTable,
    Anchor,
    EntityMention,
    HeuristicExtractor,
    Tuple,
    TupleSet,
    extract_mentions,
    extract_tuples,
    load_gazetteer,
    normalize_entity,
    run_pipeline,
    select_sentences,
)
from .graph import (
    CentralConcept,
    CentralConceptParams,
    FocusView,
    Hkg,
    KgEdge,
    KgNode,
    KnowledgeGraph,
    build_hkg,
    build_kg,
    document_subgraph,
    expand_state,
    extract_central_concepts,
    focus_filter,
    visible_nodes,
)
from .quality import (
    DegradationSpec,
    MatchCriterion,
    QualityReport,
    degradation_counts,
    degrade,
    match_tuples,
    score,
)

__version__ = "0.1.0"

__all__ = [
    "AliasTable",
    "Anchor",
    "CentralConcept",
    "CentralConceptParams",
    "Corpus",
    "DegradationSpec",
    "Document",
    "EntityMention",
    "FocusView",
    "HeuristicExtractor",
    "Hkg",
    "KgEdge",
    "KgNode",
    "KnowledgeGraph",
    "MatchCriterion",
    "Partition",
    "QualityReport",
    "RetrievalConfig",
    "SearchIndex",
    "Tuple",
    "TupleSet",
    "build_hkg",
    "build_kg",
    "degradation_counts",
    "degrade",
    "document_subgraph",
    "expand_state",
    "extract_central_concepts",
    "extract_mentions",
    "extract_tuples",
    "focus_filter",
    "load_corpus",
    "load_gazetteer",
    "match_tuples",
    "normalize_entity",
    "retrieve",
    "run_pipeline",
    "score",
    "select_sentences",
    "sentence_spans",
    "visible_nodes",
]
