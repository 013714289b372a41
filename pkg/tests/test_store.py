import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkg.analytics import InteractionEvent
from hkg.extraction import TupleSet
from hkg.graph import build_hkg
from hkg.quality import DegradationSpec, QualityReport
from hkg.store import (
    CorpusArtifact,
    CorruptArtifactError,
    EventLog,
    EventLogError,
    HkgArtifact,
    OutOfOrderEventError,
    ReportArtifact,
    StoreError,
    TupleSetArtifact,
    VersionMismatchError,
    append_event,
    canonical_json,
    event_line,
    load,
    read_events,
    save,
)

from conftest import random_tuple_set, synthetic_tuple


class TestCanonicalJson:
    def test_sorted_keys(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_float_six_significant_digits(self):
        assert canonical_json(0.123456789) == "0.123457"
        assert canonical_json(1.0) == "1.0"
        assert canonical_json(50.0) == "50.0"
        assert canonical_json(1e-7) == "1e-07"

    def test_float_formatting_is_idempotent(self):
        for x in (0.1234567, 3.14159265, 1e-7, 123456.789, 2 / 3):
            once = canonical_json(x)
            again = canonical_json(json.loads(once))
            assert once == again

    def test_int_and_containers(self):
        assert canonical_json([1, "two", None, True]) == '[1,"two",null,true]'
        assert canonical_json({"k": [{"z": 1, "a": 2}]}) == '{"k":[{"a":2,"z":1}]}'

    def test_nan_rejected(self):
        with pytest.raises(StoreError):
            canonical_json(float("nan"))

    def test_unsorted_input_maps_serialize_sorted(self):
        forward = {"alpha": 1, "beta": 2, "gamma": 3}
        backward = {"gamma": 3, "beta": 2, "alpha": 1}
        assert canonical_json(forward) == canonical_json(backward)


class TestSaveLoad:
    def test_corpus_roundtrip(self, bundled_corpus, tmp_path):
        path = tmp_path / "corpus.json"
        save(CorpusArtifact(bundled_corpus), path)
        loaded = load(path)
        assert isinstance(loaded, CorpusArtifact)
        assert loaded.corpus == bundled_corpus

    def test_tuples_roundtrip_randomized(self, tmp_path):
        rng = np.random.default_rng(3)
        for i in range(10):
            tuples = random_tuple_set(rng, int(rng.integers(0, 50)))
            path = tmp_path / f"tuples{i}.json"
            save(TupleSetArtifact(tuples), path)
            loaded = load(path)
            assert isinstance(loaded, TupleSetArtifact)
            assert loaded.tuples == tuples

    def test_hkg_roundtrip(self, bundled_corpus, bundled_tuples, tmp_path):
        hkg = build_hkg(bundled_corpus, bundled_tuples)
        artifact = HkgArtifact(
            corpus=bundled_corpus,
            hkg=hkg,
            quality=QualityReport(0.75, 0.5, 3, 4, 6),
            degradation=DegradationSpec(0.75, 0.5, seed=9),
        )
        path = tmp_path / "graph.json"
        save(artifact, path)
        loaded = load(path)
        assert isinstance(loaded, HkgArtifact)
        assert loaded.corpus == artifact.corpus
        assert loaded.hkg.minimaps == hkg.minimaps
        assert loaded.hkg.mappings == hkg.mappings
        assert loaded.hkg.params == hkg.params
        assert loaded.hkg.detail == hkg.detail
        assert loaded.quality == artifact.quality
        assert loaded.degradation == artifact.degradation

    @settings(max_examples=50, deadline=None)
    @given(
        precision=st.floats(0.001, 1.0),
        recall=st.floats(0.0, 1.0),
        matched=st.integers(0, 10_000),
    )
    def test_report_roundtrip_randomized(self, tmp_path_factory, precision, recall, matched):
        # Floats are canonicalized to 6 significant digits at save time.
        canonical = lambda x: json.loads(canonical_json(x))
        report = QualityReport(
            precision=canonical(precision),
            recall=canonical(recall),
            matched=matched,
            system_size=matched * 2,
            gold_size=matched * 3,
        )
        path = tmp_path_factory.mktemp("reports") / "report.json"
        save(ReportArtifact(report), path)
        loaded = load(path)
        assert isinstance(loaded, ReportArtifact)
        assert loaded.report == report

    def test_save_twice_same_hash(self, bundled_corpus, bundled_tuples, tmp_path):
        artifact = HkgArtifact(bundled_corpus, build_hkg(bundled_corpus, bundled_tuples))
        h1 = save(artifact, tmp_path / "a.json")
        h2 = save(artifact, tmp_path / "b.json")
        assert h1 == h2
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_save_load_save_is_stable(self, tmp_path):
        tuples = random_tuple_set(np.random.default_rng(5), 20)
        p1, p2 = tmp_path / "one.json", tmp_path / "two.json"
        h1 = save(TupleSetArtifact(tuples), p1)
        h2 = save(load(p1), p2)
        assert h1 == h2
        assert p1.read_bytes() == p2.read_bytes()

    def test_version_mismatch_names_both_versions(self, tmp_path):
        path = tmp_path / "artifact.json"
        save(TupleSetArtifact(TupleSet()), path)
        envelope = json.loads(path.read_text(encoding="utf-8"))
        envelope["format_version"] = 2
        path.write_text(json.dumps(envelope), encoding="utf-8")
        with pytest.raises(VersionMismatchError, match=r"2.*1"):
            load(path)

    def test_flipped_byte_is_corruption(self, tmp_path):
        path = tmp_path / "artifact.json"
        save(TupleSetArtifact(TupleSet.from_iterable([synthetic_tuple("a", "b", "rel")])), path)
        text = path.read_text(encoding="utf-8")
        assert '"rel"' in text
        path.write_text(text.replace('"rel"', '"reX"', 1), encoding="utf-8")
        with pytest.raises(CorruptArtifactError):
            load(path)

    def test_unwritable_path(self, bundled_corpus):
        with pytest.raises(StoreError):
            save(CorpusArtifact(bundled_corpus), "/proc/definitely/not/writable.json")


class TestEventLog:
    def _event(self, session: str, t: int, kind: str = "NodeClick", **payload) -> InteractionEvent:
        return InteractionEvent(session=session, t_ms=t, kind=kind, payload=payload)

    def test_append_in_order(self, tmp_path):
        log = EventLog(tmp_path / "log.jsonl")
        log.append(self._event("s", 1))
        log.append(self._event("s", 2))
        events = log.events()
        assert [e.t_ms for e in events] == [1, 2]

    def test_out_of_order_rejected(self, tmp_path):
        log = EventLog(tmp_path / "log.jsonl")
        log.append(self._event("s", 2))
        with pytest.raises(OutOfOrderEventError):
            log.append(self._event("s", 1))
        assert len(log.events()) == 1

    def test_equal_timestamps_accepted(self, tmp_path):
        log = EventLog(tmp_path / "log.jsonl")
        log.append(self._event("s", 5))
        log.append(self._event("s", 5))
        assert len(log.events()) == 2

    def test_interleaved_sessions_have_independent_clocks(self, tmp_path):
        log = EventLog(tmp_path / "log.jsonl")
        log.append(self._event("s1", 10))
        log.append(self._event("s2", 1))
        log.append(self._event("s1", 11))
        log.append(self._event("s2", 2))
        assert [e.t_ms for e in log.events(session="s2")] == [1, 2]

    def test_monotonicity_survives_reopen(self, tmp_path):
        path = tmp_path / "log.jsonl"
        EventLog(path).append(self._event("s", 10))
        reopened = EventLog(path)
        with pytest.raises(OutOfOrderEventError):
            reopened.append(self._event("s", 5))

    def test_unknown_kind_rejected(self, tmp_path):
        log = EventLog(tmp_path / "log.jsonl")
        with pytest.raises(EventLogError):
            log.append(self._event("s", 1, kind="Telepathy"))

    def test_append_event_accepts_path(self, tmp_path):
        path = tmp_path / "log.jsonl"
        append_event(path, self._event("s", 1))
        assert len(read_events(path)) == 1

    def test_line_format_is_bit_exact(self):
        event = InteractionEvent(
            session="s1", t_ms=5, kind="LayerEnter", payload={"view": "Global"}
        )
        assert (
            event_line(event)
            == '{"session":"s1","t_ms":5,"kind":"LayerEnter","payload":{"view":"Global"}}\n'
        )

    def test_truncated_trailing_line_dropped(self, tmp_path, caplog):
        path = tmp_path / "log.jsonl"
        log = EventLog(path)
        log.append(self._event("s", 1))
        log.append(self._event("s", 2))
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"session":"s","t_ms":3,"ki')  # crash mid-write
        events = read_events(path)
        assert [e.t_ms for e in events] == [1, 2]
        # and the log reopens cleanly for appending
        EventLog(path).append(self._event("s", 3))

    def test_invalid_middle_line_is_an_error(self, tmp_path):
        path = tmp_path / "log.jsonl"
        path.write_text('not json\n{"session":"s","t_ms":1,"kind":"NodeClick","payload":{}}\n')
        with pytest.raises(EventLogError):
            read_events(path)

    def test_reserialization_preserves_events(self, fixtures_dir, tmp_path):
        events = read_events(fixtures_dir / "session_log.jsonl")
        out = tmp_path / "copy.jsonl"
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            for e in events:
                fh.write(event_line(e))
        assert read_events(out) == events
        assert out.read_bytes() == (fixtures_dir / "session_log.jsonl").read_bytes()
