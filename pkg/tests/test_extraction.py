from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hkg.extraction import (
    AliasTable,
    NormalizationError,
    TupleSet,
    extract_mentions,
    extract_tuples,
    normalize_entity,
    run_pipeline,
    select_sentences,
)
from hkg.corpus import Corpus

from conftest import corpus_of, make_doc


class TestNormalizeEntity:
    def test_case_fold(self, empty_aliases):
        assert normalize_entity("Canada", empty_aliases) == "canada"

    def test_whitespace_collapse_and_strip(self, empty_aliases):
        assert normalize_entity("  Upper   Canada ", empty_aliases) == "upper canada"

    def test_alias_lookup(self):
        aliases = AliasTable.from_raw({"u.s.s.r": "soviet union"})
        assert normalize_entity("U.S.S.R", aliases) == "soviet union"
        assert normalize_entity("U.S.S.R.", aliases) == "soviet union"

    def test_all_punctuation_is_an_error(self, empty_aliases):
        with pytest.raises(NormalizationError):
            normalize_entity("...!?", empty_aliases)

    def test_empty_surface_is_an_error(self, empty_aliases):
        with pytest.raises(NormalizationError):
            normalize_entity("", empty_aliases)

    def test_alias_table_rejects_conflicts(self):
        with pytest.raises(Exception, match="both"):
            AliasTable.from_raw({"York": "toronto", "york": "new york"})


class TestExtractMentions:
    def test_gazetteer_spans_counted_by_hand(self, empty_aliases):
        doc = make_doc("d", "Ottawa is the capital of Canada.")
        mentions = extract_mentions(doc, {"ottawa", "canada"}, empty_aliases)
        by_id = {m.canonical_id: m.span for m in mentions}
        assert by_id["ottawa"] == (0, 6)
        assert by_id["canada"] == (25, 31)

    def test_empty_body(self, empty_aliases):
        doc = make_doc("d", "")
        assert extract_mentions(doc, {"ottawa"}, empty_aliases) == []

    def test_capitalized_run_heuristic(self, empty_aliases):
        doc = make_doc(
            "d", "The Constitutional Act divided the Province of Quebec into Upper and Lower Canada."
        )
        mentions = extract_mentions(doc, set(), empty_aliases)
        ids = {m.canonical_id for m in mentions}
        assert "constitutional act" in ids
        assert "lower canada" in ids

    def test_sentence_initial_stopword_excluded(self, empty_aliases):
        doc = make_doc("d", "The Ottawa River flows west.")
        mentions = extract_mentions(doc, set(), empty_aliases)
        assert [m.canonical_id for m in mentions] == ["ottawa river"]

    def test_longest_match_beats_shorter_gazetteer_entry(self, empty_aliases):
        doc = make_doc("d", "He toured Lower Canada often.")
        mentions = extract_mentions(doc, {"canada"}, empty_aliases)
        assert [m.canonical_id for m in mentions] == ["lower canada"]

    def test_surface_equals_body_slice(self, bundled_corpus, bundled_gazetteer):
        gazetteer, aliases = bundled_gazetteer
        for doc in bundled_corpus.documents.values():
            for m in extract_mentions(doc, gazetteer, aliases):
                assert m.surface == doc.body[m.span[0] : m.span[1]]
                s, e = doc.sentence_spans[m.sentence_index]
                assert s <= m.span[0] < m.span[1] <= e

    def test_mention_spans_never_overlap(self, bundled_corpus, bundled_gazetteer):
        gazetteer, aliases = bundled_gazetteer
        for doc in bundled_corpus.documents.values():
            mentions = extract_mentions(doc, gazetteer, aliases)
            for a, b in zip(mentions, mentions[1:]):
                assert a.span[1] <= b.span[0]

    @given(st.text(alphabet="AaBb cd. ", min_size=0, max_size=60))
    def test_random_text_mentions_well_formed(self, body):
        doc = make_doc("d", body)
        mentions = extract_mentions(doc, {"ab", "cd ab"}, AliasTable())
        prev_end = 0
        for m in mentions:
            assert m.span[0] >= prev_end
            prev_end = m.span[1]
            assert m.surface == body[m.span[0] : m.span[1]]


class TestSelectSentences:
    def test_single_mention_sentence_excluded(self, empty_aliases):
        doc = make_doc("d", "Ottawa stands alone.")
        mentions = extract_mentions(doc, {"ottawa"}, empty_aliases)
        assert select_sentences(doc, mentions) == []

    def test_distinct_entity_counts_one_two_three(self, empty_aliases):
        body = (
            "Ottawa stands alone. "
            "Ottawa faces Canada. "
            "Kingston linked Ottawa with Canada."
        )
        doc = make_doc("d", body)
        mentions = extract_mentions(doc, {"ottawa", "canada", "kingston"}, empty_aliases)
        per_sentence = {}
        for m in mentions:
            per_sentence.setdefault(m.sentence_index, set()).add(m.canonical_id)
        assert [len(per_sentence.get(i, ())) for i in range(3)] == [1, 2, 3]
        assert select_sentences(doc, mentions) == [1, 2]

    def test_shared_canonical_id_does_not_count_twice(self):
        aliases = AliasTable.from_raw({"bytown": "ottawa"})
        doc = make_doc("d", "Bytown became Ottawa.")
        mentions = extract_mentions(doc, {"ottawa"}, aliases)
        assert len(mentions) == 2
        assert {m.canonical_id for m in mentions} == {"ottawa"}
        assert select_sentences(doc, mentions) == []


class TestExtractTuples:
    def test_relation_is_connecting_span(self, empty_aliases):
        body = "President nominates the Cabinet members to the Parliament"
        doc = make_doc("d", body)
        mentions = [
            m
            for m in extract_mentions(doc, {"president", "parliament"}, empty_aliases)
            if m.canonical_id in {"president", "parliament"}
        ]
        tuples = extract_tuples(doc, 0, mentions)
        assert len(tuples) == 1
        t = tuples[0]
        assert (t.entity1, t.entity2) == ("president", "parliament")
        assert t.relation == "President nominates the Cabinet members to the Parliament"
        assert t.snippet == body

    def test_three_entities_give_three_tuples(self, empty_aliases):
        doc = make_doc("d", "Kingston linked Ottawa with Canada.")
        mentions = extract_mentions(doc, {"kingston", "ottawa", "canada"}, empty_aliases)
        tuples = extract_tuples(doc, 0, mentions)
        assert len(tuples) == comb(3, 2)
        assert len({t.pair() for t in tuples}) == 3

    def test_shared_canonical_id_yields_no_tuples(self):
        aliases = AliasTable.from_raw({"bytown": "ottawa"})
        doc = make_doc("d", "Bytown became Ottawa.")
        mentions = extract_mentions(doc, {"ottawa"}, aliases)
        assert extract_tuples(doc, 0, mentions) == []

    def test_salience_sums_document_mention_counts(self, empty_aliases):
        body = "Ottawa hosts Parliament. Ottawa grew. Ottawa prospered."
        doc = make_doc("d", body)
        mentions = extract_mentions(doc, {"ottawa", "parliament"}, empty_aliases)
        counts = {"ottawa": 3, "parliament": 1}
        tuples = extract_tuples(doc, 0, mentions, counts)
        assert tuples[0].salience == 4

    def test_snippet_is_exact_sentence(self, empty_aliases):
        doc = make_doc("d", "First filler here. Ottawa faces Canada now.")
        mentions = extract_mentions(doc, {"ottawa", "canada"}, empty_aliases)
        (t,) = extract_tuples(doc, 1, mentions)
        s, e = doc.sentence_spans[1]
        assert t.snippet == doc.body[s:e]
        assert (t.anchor.start, t.anchor.end) == (s, e)


class TestRunPipeline:
    def test_empty_corpus(self, empty_aliases):
        assert len(run_pipeline(Corpus(), set(), empty_aliases)) == 0

    def test_two_selected_sentences_two_tuples(self, empty_aliases):
        doc = make_doc("d", "Ottawa joined Canada. Ottawa left Canada.")
        corpus = corpus_of([doc])
        tuples = run_pipeline(corpus, {"ottawa", "canada"}, empty_aliases)
        assert len(tuples) == 2
        assert {t.pair() for t in tuples} == {("canada", "ottawa")}

    def test_determinism_same_hash(self, bundled_corpus, bundled_gazetteer):
        gazetteer, aliases = bundled_gazetteer
        a = run_pipeline(bundled_corpus, gazetteer, aliases)
        b = run_pipeline(bundled_corpus, gazetteer, aliases)
        assert a.content_hash() == b.content_hash()

    def test_purity_under_reconstructed_inputs(self, fixtures_dir):
        from hkg.corpus import load_corpus
        from hkg.extraction import load_gazetteer

        results = []
        for _ in range(2):
            corpus = load_corpus(fixtures_dir / "manifest.json")
            gazetteer, aliases = load_gazetteer(fixtures_dir / "gazetteer.json")
            results.append(run_pipeline(corpus, gazetteer, aliases).to_jsonl())
        assert results[0] == results[1]

    def test_dedup_on_identity_key(self, empty_aliases):
        # The same sentence processed twice collapses to one tuple.
        doc = make_doc("d", "Ottawa faces Canada.")
        mentions = extract_mentions(doc, {"ottawa", "canada"}, empty_aliases)
        tuples = extract_tuples(doc, 0, mentions) + extract_tuples(doc, 0, mentions)
        assert len(TupleSet.from_iterable(tuples)) == 1

    def test_tuple_invariants_on_bundled_corpus(
        self, bundled_corpus, bundled_tuples, bundled_gazetteer
    ):
        gazetteer, aliases = bundled_gazetteer
        assert len(bundled_tuples) > 0
        for t in bundled_tuples:
            assert t.entity1 != t.entity2
            doc = bundled_corpus.documents[t.anchor.doc_id]
            assert t.snippet == doc.body[t.anchor.start : t.anchor.end]
            assert (t.anchor.start, t.anchor.end) in doc.sentence_spans

    def test_per_sentence_tuple_count_is_choose_two(
        self, bundled_corpus, bundled_tuples, bundled_gazetteer
    ):
        gazetteer, aliases = bundled_gazetteer
        counts = {}
        for t in bundled_tuples:
            counts[t.anchor.key()] = counts.get(t.anchor.key(), 0) + 1
        for doc in bundled_corpus.documents.values():
            mentions = extract_mentions(doc, gazetteer, aliases)
            per_sentence = {}
            for m in mentions:
                per_sentence.setdefault(m.sentence_index, set()).add(m.canonical_id)
            for idx, ids in per_sentence.items():
                s, e = doc.sentence_spans[idx]
                expected = comb(len(ids), 2)
                assert counts.get((doc.doc_id, s, e), 0) == expected

    def test_random_corpora_tuple_invariants(self):
        # Randomized fixture corpora from a tiny grammar.
        rng = np.random.default_rng(7)
        entities = ["Ottawa", "Canada", "Kingston", "Montreal", "Parliament"]
        verbs = ["faces", "joined", "left", "ruled", "borders"]
        for trial in range(25):
            n_sentences = int(rng.integers(1, 6))
            sentences = []
            for _ in range(n_sentences):
                k = int(rng.integers(1, 4))
                chosen = rng.choice(len(entities), size=k, replace=False)
                verb = verbs[int(rng.integers(0, len(verbs)))]
                names = [entities[int(c)] for c in chosen]
                sentences.append(f"{' and '.join(names)} {verb} the land.")
            doc = make_doc(f"d{trial}", " ".join(sentences))
            corpus = corpus_of([doc])
            tuples = run_pipeline(corpus, {e.lower() for e in entities}, AliasTable())
            for t in tuples:
                assert t.entity1 != t.entity2
                assert t.snippet == doc.body[t.anchor.start : t.anchor.end]
                folded = " ".join(t.snippet.casefold().split())
                assert t.entity1 in folded and t.entity2 in folded
