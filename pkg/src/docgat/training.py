"""Training loop, metrics, and the k-fold cross-validation harness."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tape, Tensor, backward
from .config import PipelineConfig
from .corpus import Corpus, Document, FoldPlan, Label, LABELS, stratified_kfold
from .features import Vocabulary, document_terms, fit_vocabulary_from_terms, tfidf_transform
from .graphs import DocumentGraph, build_graph_from_sentences
from .model import (
    ModelConfig,
    N_CLASSES,
    ResidualGatModel,
    forward_logits,
    init_params,
    softmax_row,
)
from .preprocess import sentence_token_lists
from .rng import split_rng

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-3
    epochs: int = 100
    early_stop_patience: int = 10
    seed: int = 42
    class_weighting: str = "inverse_frequency"
    l2: float = 5e-4

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.class_weighting not in ("inverse_frequency", "none"):
            raise ValueError(f"unknown class_weighting: {self.class_weighting!r}")


@dataclass
class TrainHistory:
    """Per-epoch (train_loss, val_loss) plus the early-stopping outcome."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_loss: float = math.inf


@dataclass(frozen=True)
class Metrics:
    per_class: dict[Label, tuple[float, float, float]]
    macro_f1: float
    accuracy: float
    support: dict[Label, int]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted."""

    counts: np.ndarray

    @property
    def row_normalized(self) -> np.ndarray:
        totals = self.counts.sum(axis=1, keepdims=True)
        out = np.zeros_like(self.counts, dtype=np.float64)
        np.divide(self.counts, totals, out=out, where=totals > 0)
        return out


def compute_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> tuple[Metrics, ConfusionMatrix]:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise ValueError("cannot compute metrics on an empty set")
    if y_true.shape != y_pred.shape:
        raise ValueError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        counts[t, p] += 1
    per_class: dict[Label, tuple[float, float, float]] = {}
    f1s = []
    for label in LABELS:
        c = int(label)
        tp = int(counts[c, c])
        predicted = int(counts[:, c].sum())
        actual = int(counts[c, :].sum())
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[label] = (precision, recall, f1)
        f1s.append(f1)
    metrics = Metrics(
        per_class=per_class,
        macro_f1=float(np.mean(f1s)),
        accuracy=float(np.trace(counts) / counts.sum()),
        support={label: int(counts[int(label), :].sum()) for label in LABELS},
    )
    return metrics, ConfusionMatrix(counts)


def class_weights(labels: Sequence[int], scheme: str) -> dict[int, float]:
    """inverse_frequency: w_c = n_total / (n_classes * n_c); none: all 1.0."""
    labels = list(labels)
    if scheme == "none":
        return {c: 1.0 for c in range(N_CLASSES)}
    if scheme != "inverse_frequency":
        raise ValueError(f"unknown class_weighting: {scheme!r}")
    n = len(labels)
    weights = {}
    for c in range(N_CLASSES):
        n_c = labels.count(c)
        weights[c] = n / (N_CLASSES * n_c) if n_c else 0.0
    return weights


class Adam:
    """Adaptive-moment optimizer with fixed beta1=0.9, beta2=0.999, eps=1e-8."""

    def __init__(self, params: Sequence[Tensor], learning_rate: float):
        self.params = list(params)
        self.lr = learning_rate
        self.t = 0
        self._m = [np.zeros_like(p.values) for p in self.params]
        self._v = [np.zeros_like(p.values) for p in self.params]

    def step(self, grads: dict[Tensor, np.ndarray]) -> None:
        self.t += 1
        for i, p in enumerate(self.params):
            g = grads[p]
            self._m[i] = ADAM_BETA1 * self._m[i] + (1 - ADAM_BETA1) * g
            self._v[i] = ADAM_BETA2 * self._v[i] + (1 - ADAM_BETA2) * g * g
            m_hat = self._m[i] / (1 - ADAM_BETA1**self.t)
            v_hat = self._v[i] / (1 - ADAM_BETA2**self.t)
            p.values -= self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


@dataclass
class PreparedGraph:
    """Forward-ready view of a labeled graph."""

    features: object
    mask: np.ndarray
    label: int


def _prepare(graph: DocumentGraph, require_label: bool = True) -> PreparedGraph:
    if require_label and graph.label is None:
        raise ValueError(f"graph {graph.doc_id!r} has no label")
    return PreparedGraph(
        features=graph.node_features,
        mask=graph.adjacency_mask(),
        label=int(graph.label) if graph.label is not None else -1,
    )


def _mean_cross_entropy(model: ResidualGatModel, prepared: Sequence[PreparedGraph]) -> float:
    total = 0.0
    for pg in prepared:
        logits = forward_logits(model, pg.features, pg.mask, tape=None, train_mode=False)
        total += float(ad.cross_entropy_with_logits(None, logits, pg.label).values[0, 0])
    return total / len(prepared)


def train(
    graphs: Sequence[DocumentGraph],
    val_graphs: Sequence[DocumentGraph],
    model_config: ModelConfig,
    train_config: TrainConfig = TrainConfig(),
) -> tuple[ResidualGatModel, TrainHistory]:
    """Full-batch training with class-weighted cross-entropy plus an L2
    penalty; one optimizer step per epoch over the whole training set in a
    fixed order. Early stopping watches validation loss and the parameters
    of the best validation epoch are restored at the end.
    """
    if not graphs:
        raise ValueError("no training graphs")
    if not val_graphs:
        raise ValueError("validation set is empty")
    prepared = [_prepare(g) for g in graphs]
    prepared_val = [_prepare(g) for g in val_graphs]
    present = {pg.label for pg in prepared}
    for label in LABELS:
        if int(label) not in present:
            raise ValueError(f"class {label.display!r} is missing from the training set")

    weights = class_weights([pg.label for pg in prepared], train_config.class_weighting)
    model = init_params(model_config, train_config.seed)
    params = model.parameters()
    optimizer = Adam(params, train_config.learning_rate)
    n = len(prepared)
    l2 = train_config.l2

    history = TrainHistory()
    best_state: list[np.ndarray] | None = None
    epochs_since_best = 0
    for epoch in range(1, train_config.epochs + 1):
        totals = {p: np.zeros_like(p.values) for p in params}
        train_loss = 0.0
        for gi, pg in enumerate(prepared):
            tape = Tape(params)
            rng = split_rng(train_config.seed, "dropout", epoch, gi)
            logits = forward_logits(model, pg.features, pg.mask, tape, train_mode=True, rng=rng)
            ce = ad.cross_entropy_with_logits(tape, logits, pg.label)
            loss = ad.scale(tape, ce, weights[pg.label] / n)
            train_loss += float(loss.values[0, 0])
            for p, g in backward(tape, loss).items():
                totals[p] += g
        if l2 > 0.0:
            for p in params:
                train_loss += l2 * float(np.sum(p.values**2))
                totals[p] += (2.0 * l2) * p.values
        if not math.isfinite(train_loss):
            raise RuntimeError(f"non-finite training loss at epoch {epoch}")
        optimizer.step(totals)

        val_loss = _mean_cross_entropy(model, prepared_val)
        if not math.isfinite(val_loss):
            raise RuntimeError(f"non-finite validation loss at epoch {epoch}")
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.stopped_epoch = epoch
        if val_loss < history.best_val_loss:
            history.best_val_loss = val_loss
            history.best_epoch = epoch
            best_state = [p.values.copy() for p in params]
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= train_config.early_stop_patience:
                break

    assert best_state is not None
    for p, saved in zip(params, best_state):
        p.values[...] = saved
    return model, history


def predict_codes(model: ResidualGatModel, graphs: Sequence[DocumentGraph]) -> np.ndarray:
    """Eval-mode argmax predictions; ties resolve to the lowest class code."""
    codes = np.empty(len(graphs), dtype=np.int64)
    for i, g in enumerate(graphs):
        logits = forward_logits(model, g.node_features, g.adjacency_mask())
        codes[i] = int(np.argmax(softmax_row(logits.values[0])))
    return codes


def evaluate(
    model: ResidualGatModel, graphs: Sequence[DocumentGraph]
) -> tuple[Metrics, ConfusionMatrix]:
    if not graphs:
        raise ValueError("cannot evaluate on an empty set")
    for g in graphs:
        if g.label is None:
            raise ValueError(f"graph {g.doc_id!r} has no label")
    y_true = np.array([int(g.label) for g in graphs], dtype=np.int64)
    return compute_metrics(y_true, predict_codes(model, graphs))


def stratified_holdout(
    labels: Sequence[int], fraction: float, rng: np.random.Generator
) -> np.ndarray:
    """Boolean mask marking a per-class random ``fraction`` (at least one
    member of every present class) for validation."""
    labels = np.asarray(labels)
    mask = np.zeros(labels.shape[0], dtype=bool)
    for c in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == c)
        take = max(1, int(round(fraction * idx.size)))
        take = min(take, idx.size - 1) if idx.size > 1 else take
        chosen = rng.permutation(idx.size)[:take]
        mask[idx[chosen]] = True
    return mask


@dataclass
class FoldResult:
    metrics: Metrics
    confusion: ConfusionMatrix
    history: TrainHistory | None


@dataclass
class CvResult:
    folds: list[FoldResult]
    mean_macro_f1: float
    std_macro_f1: float
    mean_accuracy: float
    std_accuracy: float
    pooled_confusion: ConfusionMatrix

    @property
    def fold_metrics(self) -> list[Metrics]:
        return [f.metrics for f in self.folds]


def _aggregate(folds: list[FoldResult]) -> CvResult:
    macro = [f.metrics.macro_f1 for f in folds]
    acc = [f.metrics.accuracy for f in folds]
    pooled = ConfusionMatrix(np.sum([f.confusion.counts for f in folds], axis=0))
    return CvResult(
        folds=folds,
        mean_macro_f1=statistics.mean(macro),
        std_macro_f1=statistics.stdev(macro) if len(macro) > 1 else 0.0,
        mean_accuracy=statistics.mean(acc),
        std_accuracy=statistics.stdev(acc) if len(acc) > 1 else 0.0,
        pooled_confusion=pooled,
    )


def _tokenized(corpus: Corpus) -> dict[str, list[list[str]]]:
    return {doc.id: sentence_token_lists(doc.text) for doc in corpus}


def fold_vocabulary(
    corpus: Corpus,
    plan: FoldPlan,
    fold: int,
    config: PipelineConfig,
    tokenized: dict[str, list[list[str]]] | None = None,
) -> Vocabulary:
    """Vocabulary fitted on the training side of one fold only, so no
    evaluation document's text influences document-frequency counts."""
    tokenized = tokenized if tokenized is not None else _tokenized(corpus)
    train_docs, _ = plan.split(corpus, fold)
    streams = (document_terms(tokenized[d.id], config.ngram_mode) for d in train_docs)
    return fit_vocabulary_from_terms(streams, config.ngram_mode, config.max_features)


def _build_graphs(
    docs: Sequence[Document],
    tokenized: dict[str, list[list[str]]],
    vocab: Vocabulary,
    sim_threshold: float,
) -> list[DocumentGraph]:
    return [
        build_graph_from_sentences(
            tokenized[d.id], vocab, sim_threshold, label=d.label, doc_id=d.id
        )
        for d in docs
    ]


def _run_rgat_fold(
    corpus: Corpus,
    plan: FoldPlan,
    fold: int,
    config: PipelineConfig,
    seed: int,
    tokenized: dict[str, list[list[str]]],
) -> FoldResult:
    train_docs, test_docs = plan.split(corpus, fold)
    vocab = fold_vocabulary(corpus, plan, fold, config, tokenized)
    holdout_rng = split_rng(seed, "folds", fold, 1)
    val_mask = stratified_holdout([int(d.label) for d in train_docs], config.val_fraction, holdout_rng)
    inner_train = [d for d, held in zip(train_docs, val_mask) if not held]
    inner_val = [d for d, held in zip(train_docs, val_mask) if held]
    train_graphs = _build_graphs(inner_train, tokenized, vocab, config.sim_threshold)
    val_graphs = _build_graphs(inner_val, tokenized, vocab, config.sim_threshold)
    test_graphs = _build_graphs(test_docs, tokenized, vocab, config.sim_threshold)
    model_config = ModelConfig(
        in_dim=vocab.size,
        hidden_width=config.hidden_width,
        heads=config.heads,
        leaky_slope=config.leaky_slope,
        activation=config.activation,
        dropout_keep=config.dropout_keep,
    )
    train_config = TrainConfig(
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        early_stop_patience=config.early_stop_patience,
        seed=seed + fold,
        class_weighting=config.class_weighting,
        l2=config.l2,
    )
    model, history = train(train_graphs, val_graphs, model_config, train_config)
    metrics, confusion = evaluate(model, test_graphs)
    return FoldResult(metrics=metrics, confusion=confusion, history=history)


def cross_validate(
    corpus: Corpus,
    config: PipelineConfig = PipelineConfig(),
    k: int = 5,
    seed: int = 42,
    n_jobs: int = 1,
) -> CvResult:
    """Stratified k-fold evaluation of the graph attention classifier.

    For every fold the vocabulary (and hence idf) is fitted on the
    training folds only, graphs are rebuilt, 10% of the training documents
    (stratified) are held out for early stopping, and the model is
    evaluated on the untouched test fold. Folds are independent (each
    derives its own seed from the fold index), so ``n_jobs`` > 1 runs
    them in parallel processes without changing any result.
    """
    plan = stratified_kfold(corpus, k, seed)
    tokenized = _tokenized(corpus)
    folds = _map_folds(
        _run_rgat_fold,
        [(corpus, plan, fold, config, seed, tokenized) for fold in range(k)],
        n_jobs,
    )
    return _aggregate(folds)


def _map_folds(fn, arg_tuples: list[tuple], n_jobs: int) -> list[FoldResult]:
    if n_jobs == 1 or len(arg_tuples) == 1:
        return [fn(*args) for args in arg_tuples]
    from joblib import Parallel, delayed

    return Parallel(n_jobs=n_jobs)(delayed(fn)(*args) for args in arg_tuples)


def _run_baseline_fold(
    corpus: Corpus,
    plan: FoldPlan,
    fold: int,
    config: PipelineConfig,
    model: str,
    seed: int,
    tokenized: dict[str, list[list[str]]],
) -> FoldResult:
    from .baselines import MultinomialNaiveBayes, SoftmaxRegression
    from .sampling import smote_oversample

    train_docs, test_docs = plan.split(corpus, fold)
    vocab = fold_vocabulary(corpus, plan, fold, config, tokenized)
    X_train = _doc_matrix(train_docs, tokenized, vocab)
    y_train = np.array([int(d.label) for d in train_docs], dtype=np.int64)
    X_test = _doc_matrix(test_docs, tokenized, vocab)
    y_test = np.array([int(d.label) for d in test_docs], dtype=np.int64)
    X_train, y_train = smote_oversample(
        X_train, y_train, k_neighbors=config.smote_k, rng=split_rng(seed, "smote", fold)
    )
    if model == "mnb":
        clf = MultinomialNaiveBayes(alpha=config.mnb_alpha)
    else:
        clf = SoftmaxRegression(
            learning_rate=config.logreg_learning_rate,
            epochs=config.logreg_epochs,
            l2=config.logreg_l2,
            seed=seed + fold,
        )
    clf.fit(X_train, y_train)
    metrics, confusion = compute_metrics(y_test, clf.predict(X_test))
    return FoldResult(metrics=metrics, confusion=confusion, history=None)


def cross_validate_baseline(
    corpus: Corpus,
    config: PipelineConfig = PipelineConfig(),
    model: str = "logreg",
    k: int = 5,
    seed: int = 42,
    n_jobs: int = 1,
) -> CvResult:
    """The same fold protocol for the classical TF-IDF baselines.

    Training rows are SMOTE-balanced inside each training fold; evaluation
    rows are never resampled.
    """
    if model not in ("mnb", "logreg"):
        raise ValueError(f"unknown baseline: {model!r}")
    plan = stratified_kfold(corpus, k, seed)
    tokenized = _tokenized(corpus)
    folds = _map_folds(
        _run_baseline_fold,
        [(corpus, plan, fold, config, model, seed, tokenized) for fold in range(k)],
        n_jobs,
    )
    return _aggregate(folds)


def _doc_matrix(
    docs: Sequence[Document],
    tokenized: dict[str, list[list[str]]],
    vocab: Vocabulary,
) -> np.ndarray:
    rows = [
        tfidf_transform(document_terms(tokenized[d.id], vocab.ngram_mode), vocab).to_dense()
        for d in docs
    ]
    return np.array(rows)
