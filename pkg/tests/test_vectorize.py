import math
from types import SimpleNamespace

import numpy as np
import pytest

from categoriza.textprep import build_vocabulary
from categoriza.vectorize import (
    IdfTable,
    SparseVector,
    build_idf,
    term_frequencies,
    tfidf_normalize,
    vectorize_corpus,
    vectorize_tokens,
)

from oracles import dense_tfidf


def make_vocab(words_with_counts):
    """vocabulary from {word: (doc_freq, corpus_freq)} via the real builder path."""
    from categoriza.textprep import vocabulary_from_counts

    words = sorted(words_with_counts)
    df = [words_with_counts[w][0] for w in words]
    cf = [words_with_counts[w][1] for w in words]
    return vocabulary_from_counts(words, df, cf)


class TestSparseVector:
    def test_rejects_unsorted_indices(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            SparseVector(np.array([2, 1]), np.array([1.0, 1.0]))

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError, match="positive"):
            SparseVector(np.array([0]), np.array([0.0]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            SparseVector(np.array([0, 1]), np.array([1.0]))

    def test_dot_dense_and_to_dense(self):
        v = SparseVector.from_pairs([(1, 2.0), (3, 4.0)])
        dense = np.array([10.0, 20.0, 30.0, 40.0])
        assert v.dot_dense(dense) == 2.0 * 20.0 + 4.0 * 40.0
        assert np.array_equal(v.to_dense(5), np.array([0.0, 2.0, 0.0, 4.0, 0.0]))

    def test_empty_vector(self):
        v = SparseVector.empty()
        assert len(v) == 0
        assert v.norm() == 0.0
        assert v.dot_dense(np.array([1.0])) == 0.0


class TestTermFrequencies:
    def test_direct_count(self):
        vocab = make_vocab({"azul": (2, 2), "caneta": (2, 3)})
        v = term_frequencies(["caneta", "azul", "caneta"], vocab)
        assert v.entries == [(0, 1.0), (1, 2.0)]

    def test_out_of_vocabulary_dropped(self):
        vocab = make_vocab({"azul": (2, 2)})
        assert term_frequencies(["zzz"], vocab).entries == []

    def test_empty_tokens(self):
        vocab = make_vocab({"azul": (2, 2)})
        assert term_frequencies([], vocab).entries == []


class TestBuildIdf:
    def test_hand_computed_log(self):
        vocab = make_vocab({"raro": (1, 2)})
        idf = build_idf(vocab, 4)
        assert idf.values[0] == pytest.approx(math.log(4.0), abs=1e-12)

    def test_word_in_every_document_weighs_zero(self):
        vocab = make_vocab({"comum": (4, 8)})
        idf = build_idf(vocab, 4)
        assert idf.values[0] == 0.0

    def test_df_exceeding_corpus_size_errors(self):
        vocab = make_vocab({"x": (5, 6)})
        with pytest.raises(ValueError, match="exceeds corpus size"):
            build_idf(vocab, 4)

    def test_zero_df_errors(self):
        corrupt = SimpleNamespace(doc_freq=np.array([0], dtype=np.int64))
        with pytest.raises(ValueError, match="corrupt vocabulary"):
            build_idf(corrupt, 4)


class TestTfidfNormalize:
    def test_three_four_five_unit_vector(self):
        tf = SparseVector.from_pairs([(0, 3.0), (1, 4.0)])
        idf = IdfTable(4, np.array([1.0, 1.0]))
        out = tfidf_normalize(tf, idf)
        assert out.entries == [(0, pytest.approx(0.6)), (1, pytest.approx(0.8))]

    def test_zero_weight_elimination(self):
        tf = SparseVector.from_pairs([(0, 2.0)])
        idf = IdfTable(4, np.array([0.0]))
        assert tfidf_normalize(tf, idf).entries == []

    def test_mixed_weights_match_hand_computation(self):
        tf = SparseVector.from_pairs([(0, 2.0), (1, 1.0)])
        idf = IdfTable(4, np.array([math.log(4.0), math.log(2.0)]))
        out = tfidf_normalize(tf, idf)
        assert out.weights[0] == pytest.approx(0.970143, abs=1e-6)
        assert out.weights[1] == pytest.approx(0.242536, abs=1e-6)

    def test_empty_stays_empty(self):
        out = tfidf_normalize(SparseVector.empty(), IdfTable(4, np.array([])))
        assert len(out) == 0


def random_corpus(rng):
    n_words = int(rng.integers(1, 13))
    words = [f"w{i:02d}" for i in range(n_words)]
    n_docs = int(rng.integers(1, 9))
    docs = []
    for _ in range(n_docs):
        doc_len = int(rng.integers(0, 9))
        docs.append([words[int(i)] for i in rng.integers(0, n_words, doc_len)])
    return docs


class TestAgainstDenseOracle:
    def test_random_corpora_match_elementwise(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(200):
            docs = random_corpus(rng)
            if not any(docs):
                continue
            words, dense = dense_tfidf(docs)
            if not words:
                continue
            vocab = build_vocabulary(docs)
            assert list(vocab.words) == words
            idf = build_idf(vocab, len(docs))
            for j, doc in enumerate(docs):
                sparse = vectorize_tokens(doc, vocab, idf).to_dense(len(words))
                np.testing.assert_allclose(sparse, dense[j], rtol=0, atol=1e-12)
            checked += 1
        assert checked > 100

    def test_unit_norm_for_nonempty_vectors(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            docs = random_corpus(rng)
            if not any(docs):
                continue
            try:
                vocab = build_vocabulary(docs)
            except Exception:
                continue
            if not len(vocab):
                continue
            idf = build_idf(vocab, len(docs))
            for v in vectorize_corpus(docs, vocab, idf):
                if len(v):
                    assert abs(v.norm() - 1.0) <= 1e-9
