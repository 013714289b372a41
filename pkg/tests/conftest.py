import json
from pathlib import Path

import numpy as np
import pytest

from hkg.corpus import Corpus, Document, Partition, load_corpus
from hkg.extraction import AliasTable, Anchor, Tuple, TupleSet, load_gazetteer

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def bundled_corpus() -> Corpus:
    return load_corpus(FIXTURES / "manifest.json")


@pytest.fixture(scope="session")
def bundled_gazetteer():
    return load_gazetteer(FIXTURES / "gazetteer.json")


@pytest.fixture(scope="session")
def bundled_tuples(bundled_corpus, bundled_gazetteer) -> TupleSet:
    from hkg.extraction import run_pipeline

    gazetteer, aliases = bundled_gazetteer
    return run_pipeline(bundled_corpus, gazetteer, aliases)


def make_doc(doc_id: str, body: str, *, partition_id: str = "p", rank: int = 1) -> Document:
    return Document.from_text(
        doc_id, doc_id, body, source_url=f"https://en.wikipedia.org/wiki/{doc_id}",
        rank=rank, partition_id=partition_id,
    )


def single_doc_corpus(doc: Document) -> Corpus:
    part = Partition(doc.partition_id or "p", "", (doc.doc_id,))
    return Corpus(documents={doc.doc_id: doc}, partitions=(part,))


def corpus_of(docs: list[Document], partition_id: str = "p") -> Corpus:
    part = Partition(partition_id, "", tuple(d.doc_id for d in docs))
    return Corpus(documents={d.doc_id: d for d in docs}, partitions=(part,))


def write_manifest(tmp_path: Path, partitions: list[dict]) -> Path:
    """Write a manifest plus its document files under tmp_path."""
    manifest = {"partitions": []}
    for part in partitions:
        entry = {"id": part["id"], "query": part.get("query", ""), "documents": []}
        for doc in part["documents"]:
            rel = f"{doc['id']}.txt"
            (tmp_path / rel).write_text(doc["body"], encoding="utf-8")
            entry["documents"].append(
                {
                    "id": doc["id"],
                    "title": doc.get("title", doc["id"]),
                    "url": doc.get("url", f"https://en.wikipedia.org/wiki/{doc['id']}"),
                    "path": rel,
                }
            )
        manifest["partitions"].append(entry)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


def synthetic_tuple(e1: str, e2: str, relation: str, doc_id: str = "d0", start: int = 0) -> Tuple:
    snippet = f"{relation}."
    return Tuple(
        entity1=e1,
        entity2=e2,
        relation=relation,
        snippet=snippet,
        anchor=Anchor(doc_id, start, start + len(snippet)),
        salience=2,
    )


def random_tuple_set(
    rng: np.random.Generator,
    n_tuples: int,
    n_entities: int = 40,
    n_docs: int = 4,
    relation_vocab: int = 30,
) -> TupleSet:
    """Valid random tuples over a small entity/document pool."""
    entities = [f"entity{i:03d}" for i in range(n_entities)]
    docs = [f"doc{i}" for i in range(n_docs)]
    out = []
    for k in range(n_tuples):
        i, j = rng.choice(n_entities, size=2, replace=False)
        words = rng.integers(0, relation_vocab, size=int(rng.integers(3, 9)))
        relation = " ".join(f"w{w}" for w in words.tolist())
        doc = docs[int(rng.integers(0, n_docs))]
        start = int(rng.integers(0, 5000))
        out.append(
            Tuple(
                entity1=entities[int(i)],
                entity2=entities[int(j)],
                relation=relation,
                snippet=f"{relation}.",
                anchor=Anchor(doc, start, start + len(relation) + 1),
                salience=int(rng.integers(0, 10)),
            )
        )
    return TupleSet.from_iterable(out)


@pytest.fixture()
def empty_aliases() -> AliasTable:
    return AliasTable()
