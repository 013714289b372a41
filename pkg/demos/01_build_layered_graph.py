"""Walk the pipeline end to end: corpus -> tuples -> three-layer graph.

Run from the repository root:

    python demos/01_build_layered_graph.py
"""

from pathlib import Path

from hkg import (
    RetrievalConfig,
    SearchIndex,
    build_hkg,
    focus_filter,
    load_corpus,
    load_gazetteer,
    retrieve,
    run_pipeline,
    visible_nodes,
)
from hkg.graph import document_subgraph

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    corpus = load_corpus(FIXTURES / "manifest.json")
    print(f"corpus: {len(corpus)} documents in {len(corpus.partitions)} partitions")
    for part in corpus.partitions:
        print(f"  {part.partition_id:<8} {len(part.documents):>2} docs  query={part.query!r}")

    # The fixture index stands in for a search engine.
    index = SearchIndex(corpus)
    hits = retrieve("Former Capital Cities of Canada", RetrievalConfig(n=5), index)
    print(f"\ntop 5 for {hits.query!r}: {list(hits.documents)}")

    gazetteer, aliases = load_gazetteer(FIXTURES / "gazetteer.json")
    tuples = run_pipeline(corpus, gazetteer, aliases)
    print(f"\nextracted {len(tuples)} tuples; first three:")
    for t in list(tuples)[:3]:
        print(f"  ({t.entity1!r}, {t.entity2!r})  relation={t.relation[:60]!r}")

    hkg = build_hkg(corpus, tuples)
    detail = hkg.detail
    print(f"\ndetail layer: {len(detail.nodes)} entities, {len(detail.edges)} edges")

    doc_id = "upper-canada"
    print(f"\nminimap for {doc_id!r} (central concepts, degree within the document):")
    for concept in hkg.minimaps[doc_id]:
        anchored = hkg.mappings[doc_id][concept.entity]
        print(
            f"  {concept.entity:<22} degree={concept.degree:>2} "
            f"freq={concept.frequency:>2} anchors {len(anchored)} detail nodes"
        )

    sub = document_subgraph(detail, doc_id)
    initial = visible_nodes(sub, doc_id, 2, [c.entity for c in hkg.minimaps[doc_id]])
    print(f"\ninitially visible in the detailed view: {len(initial)}/{len(sub.nodes)} nodes")

    concept = hkg.minimaps[doc_id][0].entity
    view = focus_filter(sub, concept)
    print(
        f"focusing {concept!r}: {len(view.saturated)} saturated, "
        f"{len(view.blended)} alpha-blended"
    )


if __name__ == "__main__":
    main()
