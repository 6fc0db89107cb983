import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from docgat.corpus import Document, Label
from docgat.features import fit_vocabulary_from_terms
from docgat.graphs import (
    build_document_graph,
    build_graph_from_sentences,
    graph_to_json,
    neighbors,
    permute_graph,
    validate_graph,
)


@pytest.fixture()
def vocab():
    return fit_vocabulary_from_terms(
        [["aa", "bb"], ["cc", "dd"], ["ee", "ff"], ["gg"]], "unigram", 20
    )


class TestBuild:
    def test_dissimilar_sentences_get_sequence_edges_only(self, vocab):
        g = build_graph_from_sentences([["aa"], ["cc"], ["ee"]], vocab, 0.35)
        assert g.edges == (
            (0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0),
            (1, 2, 1.0), (2, 1, 1.0), (2, 2, 1.0),
        )
        assert neighbors(g, 1) == {0, 1, 2}
        validate_graph(g)

    def test_identical_sentences_max_merge_keeps_weight_one(self, vocab):
        g = build_graph_from_sentences([["aa", "bb"], ["aa", "bb"]], vocab, 0.9)
        assert (0, 1, 1.0) in g.edges and (1, 0, 1.0) in g.edges
        validate_graph(g)

    def test_single_sentence(self, vocab):
        g = build_graph_from_sentences([["aa"]], vocab, 0.35)
        assert g.n_nodes == 1
        assert g.edges == ((0, 0, 1.0),)

    def test_similarity_edge_weight_is_cosine(self, vocab):
        g = build_graph_from_sentences([["aa", "bb"], ["cc"], ["aa", "dd"]], vocab, 0.1)
        x = g.node_features.toarray()
        expected = float(x[0] @ x[2])
        weights = {(i, j): w for i, j, w in g.edges}
        assert (0, 2) in weights
        assert weights[(0, 2)] == pytest.approx(expected, abs=1e-12)
        assert weights[(2, 0)] == weights[(0, 2)]

    def test_all_oov_document_degenerates_to_single_node(self, vocab):
        g = build_graph_from_sentences([["zz"], ["qq"]], vocab, 0.35)
        assert g.n_nodes == 1
        assert g.edges == ((0, 0, 1.0),)
        assert g.node_features.nnz == 0

    def test_zero_sentences_is_an_error(self, vocab):
        with pytest.raises(ValueError, match="no sentences"):
            build_graph_from_sentences([], vocab, 0.35, doc_id="d9")

    def test_mixed_oov_sentences_keep_their_nodes(self, vocab):
        g = build_graph_from_sentences([["aa"], ["zz"]], vocab, 0.35)
        assert g.n_nodes == 2
        assert g.node_features[1].nnz == 0

    def test_from_document(self, vocab):
        doc = Document("d1", "Aa bb here. Cc dd there.", Label.LUNG)
        g = build_document_graph(doc, vocab, 0.35)
        assert g.n_nodes == 2
        assert g.label is Label.LUNG
        assert g.doc_id == "d1"

    def test_threshold_range_checked(self, vocab):
        with pytest.raises(ValueError, match="sim_threshold"):
            build_graph_from_sentences([["aa"]], vocab, 1.5)


class TestNeighbors:
    def test_contains_self(self, vocab):
        g = build_graph_from_sentences([["aa"], ["cc"]], vocab, 0.35)
        assert 0 in neighbors(g, 0)

    def test_out_of_range(self, vocab):
        g = build_graph_from_sentences([["aa"]], vocab, 0.35)
        with pytest.raises(ValueError, match="out of range"):
            neighbors(g, 1)

    def test_symmetric(self, vocab):
        g = build_graph_from_sentences([["aa", "bb"], ["cc"], ["aa"]], vocab, 0.2)
        for i in range(g.n_nodes):
            for j in neighbors(g, i):
                assert i in neighbors(g, j)


@st.composite
def sentence_lists(draw):
    alphabet = ["aa", "bb", "cc", "dd", "ee", "ff", "gg", "zz"]
    n = draw(st.integers(1, 6))
    return [
        draw(st.lists(st.sampled_from(alphabet), min_size=0, max_size=4))
        for _ in range(n)
    ]


class TestInvariants:
    @given(sentence_lists(), st.floats(0.0, 1.0))
    @settings(max_examples=80, deadline=None)
    def test_symmetry_self_loops_weight_range(self, sentences, tau):
        vocab = fit_vocabulary_from_terms(
            [["aa", "bb"], ["cc", "dd"], ["ee", "ff"], ["gg"]], "unigram", 20
        )
        g = build_graph_from_sentences(sentences, vocab, tau)
        validate_graph(g)
        for i, j, w in g.edges:
            assert 0.0 <= w <= 1.0

    def test_permuted_sentence_order_maps_similarity_edges(self, vocab):
        # Sequence links are positional by definition, so the check covers
        # feature rows plus every pair that is non-adjacent in both layouts
        # (where only similarity decides the edge).
        sentences = [["aa", "bb"], ["cc"], ["aa", "dd"], ["ee", "aa"], ["aa", "bb", "cc"]]
        g = build_graph_from_sentences(sentences, vocab, 0.05)
        perm = [1, 3, 0, 4, 2]  # new position p holds old sentence perm[p]
        permuted = build_graph_from_sentences([sentences[i] for i in perm], vocab, 0.05)
        position = {old: new for new, old in enumerate(perm)}
        old_w = {(i, j): w for i, j, w in g.edges}
        new_w = {(i, j): w for i, j, w in permuted.edges}

        checked = 0
        for a in range(len(sentences)):
            for b in range(a + 2, len(sentences)):
                pa, pb = position[a], position[b]
                if abs(pa - pb) <= 1:
                    continue
                checked += 1
                assert old_w.get((a, b)) == new_w.get((pa, pb))
        assert checked > 0
        np.testing.assert_allclose(
            permuted.node_features.toarray(), g.node_features.toarray()[perm]
        )

    def test_permute_graph_preserves_invariants(self, vocab):
        g = build_graph_from_sentences([["aa", "bb"], ["cc"], ["aa"]], vocab, 0.2)
        p = permute_graph(g, [2, 0, 1])
        validate_graph(p)
        np.testing.assert_allclose(
            p.node_features.toarray(), g.node_features.toarray()[[2, 0, 1]]
        )

    def test_permute_rejects_non_permutation(self, vocab):
        g = build_graph_from_sentences([["aa"], ["cc"]], vocab, 0.35)
        with pytest.raises(ValueError, match="permutation"):
            permute_graph(g, [0, 0])


def test_graph_json_dump(vocab):
    g = build_graph_from_sentences([["aa"], ["cc"]], vocab, 0.35, label=Label.COLON)
    payload = json.loads(graph_to_json(g))
    assert payload["n_nodes"] == 2
    assert payload["label"] == "colon"
    assert [0, 0, 1.0] in payload["edges"]
