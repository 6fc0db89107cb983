"""TF-IDF vocabulary fitting and sparse, L2-normalized feature vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus
from .preprocess import sentence_token_lists

NGRAM_MODES = ("unigram", "unigram+bigram")


def sentence_terms(tokens: Sequence[str], ngram_mode: str) -> list[str]:
    """Terms contributed by one sentence: its tokens, plus adjacent-pair
    bigrams (joined by a single space) in unigram+bigram mode."""
    if ngram_mode not in NGRAM_MODES:
        raise ValueError(f"unknown ngram mode: {ngram_mode!r}")
    terms = list(tokens)
    if ngram_mode == "unigram+bigram":
        terms.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return terms


def document_terms(token_lists: Sequence[Sequence[str]], ngram_mode: str) -> list[str]:
    """All terms of a document; bigrams never cross sentence boundaries."""
    merged: list[str] = []
    for tokens in token_lists:
        merged.extend(sentence_terms(tokens, ngram_mode))
    return merged


@dataclass(frozen=True)
class Vocabulary:
    """Term index fitted on a corpus.

    Indices are dense and ordered by document frequency descending, then
    term ascending; ``doc_freq`` counts documents, not occurrences.
    """

    terms: dict[str, int]
    doc_freq: dict[str, int]
    n_docs: int
    ngram_mode: str
    max_features: int

    def __post_init__(self) -> None:
        if self.ngram_mode not in NGRAM_MODES:
            raise ValueError(f"unknown ngram mode: {self.ngram_mode!r}")
        if len(self.terms) > self.max_features:
            raise ValueError("vocabulary exceeds max_features")
        if sorted(self.terms.values()) != list(range(len(self.terms))):
            raise ValueError("vocabulary indices must be dense and unique")

    @property
    def size(self) -> int:
        return len(self.terms)

    def idf(self, term: str) -> float:
        df = self.doc_freq.get(term)
        if df is None:
            raise KeyError(term)
        return math.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0


def fit_vocabulary_from_terms(
    doc_term_streams: Iterable[Sequence[str]],
    ngram_mode: str,
    max_features: int,
) -> Vocabulary:
    """Fit a vocabulary from per-document term streams."""
    if max_features < 1:
        raise ValueError(f"max_features must be >= 1, got {max_features}")
    df: dict[str, int] = {}
    n_docs = 0
    for terms in doc_term_streams:
        n_docs += 1
        for term in set(terms):
            df[term] = df.get(term, 0) + 1
    if n_docs == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    if not df:
        raise ValueError("no tokens survive preprocessing; vocabulary would be empty")
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:max_features]
    terms = {term: i for i, (term, _) in enumerate(ranked)}
    return Vocabulary(
        terms=terms,
        doc_freq={term: df[term] for term in terms},
        n_docs=n_docs,
        ngram_mode=ngram_mode,
        max_features=max_features,
    )


def fit_vocabulary(
    corpus: Corpus | Sequence[str],
    ngram_mode: str = "unigram",
    max_features: int = 5000,
) -> Vocabulary:
    """Tokenize a corpus (or raw texts) and fit the term index."""
    texts = [d.text for d in corpus] if isinstance(corpus, Corpus) else list(corpus)
    streams = (document_terms(sentence_token_lists(t), ngram_mode) for t in texts)
    return fit_vocabulary_from_terms(streams, ngram_mode, max_features)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse TF-IDF vector; unit Euclidean norm unless all-zero."""

    indices: np.ndarray
    weights: np.ndarray
    dimension: int

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dimension)
        dense[self.indices] = self.weights
        return dense


def tfidf_transform(unit_terms: Sequence[str], vocab: Vocabulary) -> FeatureVector:
    """Weight a unit's terms by tf * smoothed idf, then L2-normalize.

    tf is the raw count within the unit; idf = ln((1 + n_docs) / (1 + df)) + 1.
    Out-of-vocabulary terms are ignored; an all-OOV unit maps to the zero
    vector.
    """
    counts: dict[str, int] = {}
    for term in unit_terms:
        if term in vocab.terms:
            counts[term] = counts.get(term, 0) + 1
    if not counts:
        empty = np.empty(0)
        return FeatureVector(empty.astype(np.int64), empty, vocab.size)
    pairs = sorted((vocab.terms[t], c * vocab.idf(t)) for t, c in counts.items())
    indices = np.array([i for i, _ in pairs], dtype=np.int64)
    weights = np.array([w for _, w in pairs], dtype=np.float64)
    weights /= np.linalg.norm(weights)
    return FeatureVector(indices, weights, vocab.size)


def stack_vectors(vectors: Sequence[FeatureVector]) -> sp.csr_matrix:
    """Stack feature vectors into one CSR matrix (rows in given order)."""
    if not vectors:
        raise ValueError("no vectors to stack")
    dim = vectors[0].dimension
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        if v.dimension != dim:
            raise ValueError(f"dimension mismatch: {v.dimension} vs {dim}")
        indptr[i + 1] = indptr[i] + v.nnz
    indices = np.concatenate([v.indices for v in vectors]) if indptr[-1] else np.empty(0, dtype=np.int64)
    data = np.concatenate([v.weights for v in vectors]) if indptr[-1] else np.empty(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def document_vector(text: str, vocab: Vocabulary) -> FeatureVector:
    """TF-IDF vector of a whole document (all sentences merged as one unit)."""
    terms = document_terms(sentence_token_lists(text), vocab.ngram_mode)
    return tfidf_transform(terms, vocab)


class TfidfFeaturizer(BaseEstimator, TransformerMixin):
    """Fit a term vocabulary on raw texts; map texts to TF-IDF rows.

    Output rows are L2-normalized and returned as a CSR matrix, so the
    transformer drops into scikit-learn pipelines alongside the bundled
    classifiers.
    """

    def __init__(self, ngram_mode: str = "unigram", max_features: int = 5000):
        self.ngram_mode = ngram_mode
        self.max_features = max_features

    def fit(self, X, y=None):
        texts = _as_texts(X)
        self.vocabulary_ = fit_vocabulary(texts, self.ngram_mode, self.max_features)
        return self

    def transform(self, X) -> sp.csr_matrix:
        check_is_fitted(self, "vocabulary_")
        texts = _as_texts(X)
        return stack_vectors([document_vector(t, self.vocabulary_) for t in texts])


def _as_texts(X) -> list[str]:
    texts = [d.text for d in X] if isinstance(X, Corpus) else list(X)
    if not texts:
        raise ValueError("no input texts")
    if not all(isinstance(t, str) for t in texts):
        raise TypeError("expected an iterable of strings")
    return texts
