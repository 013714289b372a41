"""Start the HTTP service against freshly built artifacts and explore it.

Builds a gold artifact and a degraded variant into a temp directory,
serves them on an ephemeral port, then walks the JSON API the way the
browser client does: collection -> minimap -> detail -> expand -> edge
relations -> article text, logging interaction events along the way.
"""

import json
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn

from hkg import DegradationSpec, MatchCriterion, build_hkg, degrade, score
from hkg.corpus import load_corpus
from hkg.extraction import load_gazetteer, run_pipeline
from hkg.server import create_app, load_registry
from hkg.store import EventLog, HkgArtifact, save

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def http(method: str, url: str, body: dict | None = None) -> dict:
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="hkg-demo-"))
    corpus = load_corpus(FIXTURES / "manifest.json")
    gazetteer, aliases = load_gazetteer(FIXTURES / "gazetteer.json")
    gold_tuples = run_pipeline(corpus, gazetteer, aliases)
    save(HkgArtifact(corpus=corpus, hkg=build_hkg(corpus, gold_tuples)), workdir / "gold.json")

    spec = DegradationSpec(0.7, 0.31, seed=42)
    auto_tuples = degrade(gold_tuples, spec)
    report = score(auto_tuples, gold_tuples, MatchCriterion(theta=1.0))
    save(
        HkgArtifact(corpus, build_hkg(corpus, auto_tuples), quality=report, degradation=spec),
        workdir / "auto.json",
    )

    registry = load_registry(workdir)
    app = create_app(registry, EventLog(workdir / "events.jsonl"))
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.05)
    port = server.servers[0].sockets[0].getsockname()[1]
    base = f"http://127.0.0.1:{port}"
    print(f"serving {sorted(registry.graphs)} at {base}\n")

    graphs = http("GET", f"{base}/api/graphs")
    for g in graphs:
        quality = g["quality"]
        label = (
            f"P={quality['precision']:.3f} R={quality['recall']:.3f}" if quality else "gold"
        )
        print(f"graph {g['id']:<5} nodes={g['nodes']:<3} edges={g['edges']:<3} [{label}]")

    session = http("POST", f"{base}/api/sessions")["session_id"]
    clock = iter(range(0, 10_000, 250))

    def emit(kind: str, **payload) -> None:
        http("POST", f"{base}/api/events",
             {"session": session, "t_ms": next(clock), "kind": kind, "payload": payload})

    emit("TaskStart")
    emit("LayerEnter", view="Global")

    doc = http("GET", f"{base}/api/graphs/gold/collection")["partitions"][0]["documents"][1]["id"]
    minimap = http("GET", f"{base}/api/graphs/gold/documents/{doc}/minimap")
    print(f"\nminimap of {doc!r}: {[c['entity'] for c in minimap['concepts']]}")

    emit("LayerExit", view="Global")
    emit("LayerEnter", view="Detailed")
    detail = http("GET", f"{base}/api/graphs/gold/documents/{doc}/detail?visible_only=true")
    print(f"detailed view starts with {len(detail['nodes'])} visible nodes")

    concept = minimap["concepts"][0]["entity"]
    emit("NodeClick", node=concept)
    expanded = http(
        "POST", f"{base}/api/graphs/gold/documents/{doc}/expand",
        {"session": session, "node": concept},
    )
    print(f"expanding {concept!r} -> {len(expanded['visible'])} visible nodes")

    edge = detail["edges"][0]
    emit("EdgeClick", edge=edge["id"])
    emit("SnippetView", edge=edge["id"])
    relations = http("GET", f"{base}/api/graphs/gold/edges/{edge['id']}/relations")
    print(f"edge {edge['source']!r} -- {edge['target']!r} carries "
          f"{len(relations['relations'])} relation(s):")
    print(f"  {relations['relations'][0]['relation'][:70]!r}")

    emit("ViewArticle", doc=doc)
    text = http("GET", f"{base}/api/documents/{doc}/text")
    print(f"article {text['title']!r}: {text['body'][:60]!r}...")
    emit("ViewArticleEnd", doc=doc)
    emit("LayerExit", view="Detailed")
    emit("TaskEnd")

    metrics = http("GET", f"{base}/api/sessions/{session}/metrics")
    print(f"\nsession metrics: nc={metrics['nc']} ec={metrics['ec']} v={metrics['v']} "
          f"vt={metrics['vt_s']}s fractions={metrics['view_fractions']}")

    server.should_exit = True
    thread.join(timeout=5)
    print(f"\nartifacts and event log kept in {workdir}")


if __name__ == "__main__":
    main()
