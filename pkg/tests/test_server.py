import pytest
from fastapi.testclient import TestClient

from hkg import store
from hkg.graph import build_hkg, document_subgraph, expand_state, visible_nodes
from hkg.quality import DegradationSpec, MatchCriterion, degrade, score
from hkg.server import DEFAULT_HIDE_THRESHOLD, ServerError, create_app, load_registry
from hkg.store import EventLog, HkgArtifact


@pytest.fixture(scope="module")
def artifacts_dir(tmp_path_factory, bundled_corpus, bundled_tuples):
    directory = tmp_path_factory.mktemp("artifacts")
    hkg = build_hkg(bundled_corpus, bundled_tuples)
    store.save(HkgArtifact(corpus=bundled_corpus, hkg=hkg), directory / "gold.json")
    spec = DegradationSpec(0.7, 0.5, seed=4)
    degraded_tuples = degrade(bundled_tuples, spec)
    report = score(degraded_tuples, bundled_tuples, MatchCriterion(theta=1.0))
    degraded_hkg = build_hkg(bundled_corpus, degraded_tuples)
    store.save(
        HkgArtifact(
            corpus=bundled_corpus, hkg=degraded_hkg, quality=report, degradation=spec
        ),
        directory / "auto.json",
    )
    return directory


@pytest.fixture()
def client(artifacts_dir, tmp_path):
    registry = load_registry(artifacts_dir)
    log = EventLog(tmp_path / "events.jsonl")
    app = create_app(registry, log)
    return TestClient(app)


@pytest.fixture(scope="module")
def gold_artifact(artifacts_dir) -> HkgArtifact:
    return store.load(artifacts_dir / "gold.json")


class TestGraphEndpoints:
    def test_list_graphs_with_quality(self, client):
        body = client.get("/api/graphs").json()
        assert [g["id"] for g in body] == ["auto", "gold"]
        gold = next(g for g in body if g["id"] == "gold")
        auto = next(g for g in body if g["id"] == "auto")
        assert gold["quality"] is None
        assert 0 < auto["quality"]["precision"] <= 1

    def test_collection_lists_partitions(self, client, bundled_corpus):
        body = client.get("/api/graphs/gold/collection").json()
        assert [p["id"] for p in body["partitions"]] == ["history", "iran", "russia"]
        history = body["partitions"][0]
        assert len(history["documents"]) == 10
        assert history["documents"][0]["rank"] == 1

    def test_minimap_matches_artifact(self, client, gold_artifact):
        body = client.get("/api/graphs/gold/documents/ottawa/minimap").json()
        expected = gold_artifact.hkg.minimaps["ottawa"]
        assert [c["entity"] for c in body["concepts"]] == [c.entity for c in expected]
        assert [c["frequency"] for c in body["concepts"]] == [c.frequency for c in expected]
        for concept in body["concepts"]:
            assert concept["anchors"] == list(
                gold_artifact.hkg.mappings["ottawa"][concept["entity"]]
            )

    def test_unknown_document_404_body(self, client):
        resp = client.get("/api/graphs/gold/documents/atlantis/minimap")
        assert resp.status_code == 404
        assert resp.json() == {"error": "unknown_document"}

    def test_unknown_graph(self, client):
        resp = client.get("/api/graphs/nope/collection")
        assert resp.status_code == 404
        assert resp.json() == {"error": "unknown_graph"}

    def test_detail_visibility_flags(self, client, gold_artifact):
        body = client.get("/api/graphs/gold/documents/ottawa/detail").json()
        sub = document_subgraph(gold_artifact.hkg.detail, "ottawa")
        assert {n["entity"] for n in body["nodes"]} == set(sub.nodes)
        centrals = [c.entity for c in gold_artifact.hkg.minimaps["ottawa"]]
        expected_visible = visible_nodes(sub, "ottawa", DEFAULT_HIDE_THRESHOLD, centrals)
        assert {n["entity"] for n in body["nodes"] if n["visible"]} == expected_visible

    def test_detail_visible_only_filters_nodes_and_edges(self, client):
        full = client.get("/api/graphs/gold/documents/ottawa/detail").json()
        filtered = client.get(
            "/api/graphs/gold/documents/ottawa/detail", params={"visible_only": "true"}
        ).json()
        visible = {n["entity"] for n in full["nodes"] if n["visible"]}
        assert {n["entity"] for n in filtered["nodes"]} == visible
        for edge in filtered["edges"]:
            assert edge["source"] in visible and edge["target"] in visible

    def test_read_endpoints_are_pure(self, client):
        for url in (
            "/api/graphs",
            "/api/graphs/gold/collection",
            "/api/graphs/gold/documents/ottawa/minimap",
            "/api/graphs/gold/documents/ottawa/detail",
            "/api/documents/ottawa/text",
        ):
            assert client.get(url).content == client.get(url).content

    def test_edge_relations_payload(self, client, gold_artifact):
        edge = next(iter(sorted(gold_artifact.hkg.detail.edges.values(), key=lambda e: e.endpoints)))
        body = client.get(f"/api/graphs/gold/edges/{edge.edge_id}/relations").json()
        assert body["source"] == edge.endpoints[0]
        assert body["target"] == edge.endpoints[1]
        assert len(body["relations"]) == len(edge.relations)
        first = body["relations"][0]
        assert first["snippet"] == edge.relations[0].snippet
        assert first["doc_id"] == edge.relations[0].anchor.doc_id

    def test_unknown_edge(self, client):
        resp = client.get("/api/graphs/gold/edges/ffffffffffff/relations")
        assert resp.status_code == 404
        assert resp.json() == {"error": "unknown_edge"}

    def test_document_text(self, client, bundled_corpus):
        body = client.get("/api/documents/ottawa/text").json()
        assert body["body"] == bundled_corpus.documents["ottawa"].body
        assert body["title"] == "Ottawa"
        resp = client.get("/api/documents/atlantis/text")
        assert resp.status_code == 404
        assert resp.json() == {"error": "unknown_document"}


class TestSessionsAndEvents:
    def _session(self, client) -> str:
        return client.post("/api/sessions").json()["session_id"]

    def test_session_lifecycle_and_metrics_replay(self, client):
        session = self._session(client)
        events = [
            (0, "TaskStart", {}),
            (0, "LayerEnter", {"view": "Global"}),
            (1_000, "NodeClick", {"node": "ottawa"}),
            (2_000, "EdgeClick", {"edge": "x"}),
            (30_000, "LayerExit", {"view": "Global"}),
            (30_000, "LayerEnter", {"view": "Detailed"}),
            (40_000, "ViewArticle", {"doc": "ottawa"}),
            (55_000, "ViewArticleEnd", {"doc": "ottawa"}),
            (100_000, "LayerExit", {"view": "Detailed"}),
            (100_000, "TaskEnd", {}),
        ]
        for t, kind, payload in events:
            resp = client.post(
                "/api/events",
                json={"session": session, "t_ms": t, "kind": kind, "payload": payload},
            )
            assert resp.status_code == 200, resp.text
        metrics = client.get(f"/api/sessions/{session}/metrics").json()
        assert metrics["nc"] == 1
        assert metrics["ec"] == 1
        assert metrics["v"] == 1
        assert metrics["vt_s"] == pytest.approx(15.0)
        assert metrics["view_fractions"]["Global"] == pytest.approx(0.3)
        assert metrics["view_fractions"]["Detailed"] == pytest.approx(0.7)
        assert len(metrics["heatmap"]) == 100

    def test_out_of_order_event_rejected(self, client):
        session = self._session(client)
        ok = client.post(
            "/api/events", json={"session": session, "t_ms": 10, "kind": "TaskStart", "payload": {}}
        )
        assert ok.status_code == 200
        bad = client.post(
            "/api/events", json={"session": session, "t_ms": 5, "kind": "NodeClick", "payload": {}}
        )
        assert bad.status_code == 409
        assert bad.json()["error"] == "event_out_of_order"

    def test_unknown_session_rejected(self, client):
        resp = client.post(
            "/api/events", json={"session": "ghost", "t_ms": 0, "kind": "TaskStart", "payload": {}}
        )
        assert resp.status_code == 404
        resp = client.get("/api/sessions/ghost/metrics")
        assert resp.status_code == 404

    def test_incomplete_session_metrics_is_analysis_error(self, client):
        session = self._session(client)
        client.post(
            "/api/events", json={"session": session, "t_ms": 0, "kind": "NodeClick", "payload": {}}
        )
        resp = client.get(f"/api/sessions/{session}/metrics")
        assert resp.status_code == 422
        assert resp.json()["error"] == "analysis_error"


class TestExpand:
    def test_expand_matches_direct_computation(self, client, gold_artifact):
        doc_id = "ottawa"
        sub = document_subgraph(gold_artifact.hkg.detail, doc_id)
        centrals = [c.entity for c in gold_artifact.hkg.minimaps[doc_id]]
        visible = visible_nodes(sub, doc_id, DEFAULT_HIDE_THRESHOLD, centrals)
        clicked = sorted(visible)[0]
        expected = expand_state(sub, visible, clicked)

        session = client.post("/api/sessions").json()["session_id"]
        resp = client.post(
            f"/api/graphs/gold/documents/{doc_id}/expand",
            json={"session": session, "node": clicked},
        )
        assert resp.status_code == 200
        assert resp.json()["visible"] == sorted(expected)

    def test_expand_sequence_differential(self, client, gold_artifact):
        doc_id = "upper-canada"
        sub = document_subgraph(gold_artifact.hkg.detail, doc_id)
        centrals = [c.entity for c in gold_artifact.hkg.minimaps[doc_id]]
        state = visible_nodes(sub, doc_id, DEFAULT_HIDE_THRESHOLD, centrals)
        session = client.post("/api/sessions").json()["session_id"]
        for _ in range(4):
            clicked = sorted(state)[0]
            state = expand_state(sub, state, clicked)
            resp = client.post(
                f"/api/graphs/gold/documents/{doc_id}/expand",
                json={"session": session, "node": clicked},
            )
            assert resp.json()["visible"] == sorted(state)

    def test_expand_hidden_node_conflict(self, client, gold_artifact):
        doc_id = "ottawa"
        sub = document_subgraph(gold_artifact.hkg.detail, doc_id)
        centrals = [c.entity for c in gold_artifact.hkg.minimaps[doc_id]]
        visible = visible_nodes(sub, doc_id, DEFAULT_HIDE_THRESHOLD, centrals)
        hidden = sorted(set(sub.nodes) - visible)
        assert hidden, "fixture should hide at least one node"
        session = client.post("/api/sessions").json()["session_id"]
        resp = client.post(
            f"/api/graphs/gold/documents/{doc_id}/expand",
            json={"session": session, "node": hidden[0]},
        )
        assert resp.status_code == 409
        assert resp.json()["error"] == "node_not_visible"

    def test_expand_unknown_session(self, client):
        resp = client.post(
            "/api/graphs/gold/documents/ottawa/expand",
            json={"session": "ghost", "node": "ottawa"},
        )
        assert resp.status_code == 404


class TestRegistry:
    def test_empty_dir_is_startup_error(self, tmp_path):
        with pytest.raises(ServerError):
            load_registry(tmp_path)

    def test_non_hkg_artifacts_skipped(self, tmp_path, bundled_tuples, artifacts_dir):
        import shutil

        from hkg.store import TupleSetArtifact, save

        shutil.copy(artifacts_dir / "gold.json", tmp_path / "gold.json")
        save(TupleSetArtifact(bundled_tuples), tmp_path / "tuples.json")
        registry = load_registry(tmp_path)
        assert sorted(registry.graphs) == ["gold"]
