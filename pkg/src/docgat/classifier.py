"""Scikit-learn style front end for the sentence-graph attention pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Label
from .features import fit_vocabulary_from_terms, document_terms
from .graphs import build_graph_from_sentences
from .model import ModelConfig, forward_probabilities
from .preprocess import sentence_token_lists
from .rng import split_rng
from .training import TrainConfig, TrainHistory, stratified_holdout, train


def coerce_label(value) -> Label:
    """Accept a Label, an integer code, or a (case-insensitive) name."""
    if isinstance(value, Label):
        return value
    if isinstance(value, (int, np.integer)):
        try:
            return Label(int(value))
        except ValueError:
            raise ValueError(f"unknown label code: {value}") from None
    return Label.parse(str(value))


class ResidualGatClassifier(BaseEstimator, ClassifierMixin):
    """Classify abstracts with a residual graph attention network.

    ``fit`` takes raw texts: it fits the TF-IDF vocabulary, builds one
    sentence graph per document, holds out a stratified validation split
    for early stopping, and trains the network. ``predict`` /
    ``predict_proba`` rebuild graphs with the fitted vocabulary, so the
    estimator is inductive and drops into scikit-learn tooling.
    """

    def __init__(
        self,
        max_features: int = 5000,
        ngram_mode: str = "unigram",
        sim_threshold: float = 0.35,
        hidden_width: int = 64,
        heads: int = 4,
        leaky_slope: float = 0.2,
        activation: str = "elu",
        dropout_keep: float = 0.5,
        learning_rate: float = 5e-3,
        epochs: int = 100,
        early_stop_patience: int = 10,
        class_weighting: str = "inverse_frequency",
        l2: float = 5e-4,
        val_fraction: float = 0.1,
        seed: int = 42,
    ):
        self.max_features = max_features
        self.ngram_mode = ngram_mode
        self.sim_threshold = sim_threshold
        self.hidden_width = hidden_width
        self.heads = heads
        self.leaky_slope = leaky_slope
        self.activation = activation
        self.dropout_keep = dropout_keep
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.early_stop_patience = early_stop_patience
        self.class_weighting = class_weighting
        self.l2 = l2
        self.val_fraction = val_fraction
        self.seed = seed

    def _check_texts(self, X) -> list[str]:
        texts = list(X)
        if not texts:
            raise ValueError("no input texts")
        for i, t in enumerate(texts):
            if not isinstance(t, str):
                raise TypeError(f"text {i} is {type(t).__name__}, expected str")
            if not t.strip():
                raise ValueError(f"text {i} is empty")
        return texts

    def fit(self, X, y):
        texts = self._check_texts(X)
        labels = [coerce_label(v) for v in y]
        if len(labels) != len(texts):
            raise ValueError(f"got {len(texts)} texts but {len(labels)} labels")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")

        tokenized = [sentence_token_lists(t) for t in texts]
        vocab = fit_vocabulary_from_terms(
            (document_terms(tl, self.ngram_mode) for tl in tokenized),
            self.ngram_mode,
            self.max_features,
        )
        graphs = [
            build_graph_from_sentences(
                tl, vocab, self.sim_threshold, label=label, doc_id=str(i)
            )
            for i, (tl, label) in enumerate(zip(tokenized, labels))
        ]
        holdout_rng = split_rng(self.seed, "folds", 0, 1)
        val_mask = stratified_holdout([int(l) for l in labels], self.val_fraction, holdout_rng)
        train_graphs = [g for g, held in zip(graphs, val_mask) if not held]
        val_graphs = [g for g, held in zip(graphs, val_mask) if held]

        model_config = ModelConfig(
            in_dim=vocab.size,
            hidden_width=self.hidden_width,
            heads=self.heads,
            leaky_slope=self.leaky_slope,
            activation=self.activation,
            dropout_keep=self.dropout_keep,
        )
        train_config = TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            early_stop_patience=self.early_stop_patience,
            seed=self.seed,
            class_weighting=self.class_weighting,
            l2=self.l2,
        )
        self.model_, self.history_ = train(train_graphs, val_graphs, model_config, train_config)
        self.vocabulary_ = vocab
        self.classes_ = np.array([int(l) for l in Label], dtype=np.int64)
        return self

    def _graph_for(self, text: str):
        token_lists = sentence_token_lists(text)
        return build_graph_from_sentences(token_lists, self.vocabulary_, self.sim_threshold)

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        texts = self._check_texts(X)
        return np.array([forward_probabilities(self.model_, self._graph_for(t)) for t in texts])

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]

    def predict_labels(self, X) -> list[str]:
        """Predicted class names (``predict`` returns integer codes)."""
        return [Label(int(c)).display for c in self.predict(X)]

    @property
    def train_history(self) -> TrainHistory:
        check_is_fitted(self, "history_")
        return self.history_
