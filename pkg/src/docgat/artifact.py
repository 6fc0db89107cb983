"""Versioned model artifact: one self-describing JSON file.

The file holds the label map, the fitted vocabulary, graph and model
configuration, every parameter array, an echo of the training
configuration, and an optional metrics summary. Serialization is
canonical (sorted keys, fixed indentation, repr-round-trip floats), so
save -> load -> save is byte-identical and parameters survive exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classifier import ResidualGatClassifier
from .corpus import Label
from .features import Vocabulary
from .model import ModelConfig, init_params

FORMAT_VERSION = 1


def _dump_canonical(payload: dict, path: Path) -> None:
    text = json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def save_model(path: str | Path, clf: ResidualGatClassifier, metrics: dict | None = None) -> None:
    """Write a fitted classifier to ``path``."""
    if not hasattr(clf, "model_"):
        raise ValueError("classifier is not fitted")
    vocab = clf.vocabulary_
    payload = {
        "format_version": FORMAT_VERSION,
        "label_map": {label.display: int(label) for label in Label},
        "vocabulary": {
            "terms": vocab.terms,
            "doc_freq": vocab.doc_freq,
            "n_docs": vocab.n_docs,
            "ngram_mode": vocab.ngram_mode,
            "max_features": vocab.max_features,
        },
        "graph": {"sim_threshold": clf.sim_threshold},
        "model_config": {
            "in_dim": clf.model_.config.in_dim,
            "hidden_width": clf.model_.config.hidden_width,
            "heads": clf.model_.config.heads,
            "leaky_slope": clf.model_.config.leaky_slope,
            "activation": clf.model_.config.activation,
            "dropout_keep": clf.model_.config.dropout_keep,
        },
        "parameters": {
            name: tensor.values.tolist()
            for name, tensor in clf.model_.named_parameters().items()
        },
        "train_config": {
            "learning_rate": clf.learning_rate,
            "epochs": clf.epochs,
            "early_stop_patience": clf.early_stop_patience,
            "class_weighting": clf.class_weighting,
            "l2": clf.l2,
            "val_fraction": clf.val_fraction,
            "seed": clf.seed,
        },
        "metrics": metrics,
    }
    _dump_canonical(payload, Path(path))


def load_model(path: str | Path) -> ResidualGatClassifier:
    """Load an artifact back into a fitted classifier."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"artifact file not found: {path}")
    payload = json.loads(path.read_text("utf-8"))
    version = payload.get("format_version")
    if not isinstance(version, int):
        raise ValueError(f"{path}: missing format_version")
    if version > FORMAT_VERSION:
        raise ValueError(
            f"{path}: format_version {version} is newer than supported {FORMAT_VERSION}"
        )

    expected_map = {label.display: int(label) for label in Label}
    if payload["label_map"] != expected_map:
        raise ValueError(f"{path}: label map does not match this package's label space")

    v = payload["vocabulary"]
    vocab = Vocabulary(
        terms={str(t): int(i) for t, i in v["terms"].items()},
        doc_freq={str(t): int(d) for t, d in v["doc_freq"].items()},
        n_docs=int(v["n_docs"]),
        ngram_mode=str(v["ngram_mode"]),
        max_features=int(v["max_features"]),
    )
    mc = payload["model_config"]
    config = ModelConfig(
        in_dim=int(mc["in_dim"]),
        hidden_width=int(mc["hidden_width"]),
        heads=int(mc["heads"]),
        leaky_slope=float(mc["leaky_slope"]),
        activation=str(mc["activation"]),
        dropout_keep=float(mc["dropout_keep"]),
    )
    if config.in_dim != vocab.size:
        raise ValueError(f"{path}: model in_dim {config.in_dim} != vocabulary size {vocab.size}")

    model = init_params(config, seed=0)
    named = model.named_parameters()
    stored = payload["parameters"]
    if set(stored) != set(named):
        missing = sorted(set(named) - set(stored))
        extra = sorted(set(stored) - set(named))
        raise ValueError(f"{path}: parameter names mismatch (missing {missing}, extra {extra})")
    for name, tensor in named.items():
        arr = np.asarray(stored[name], dtype=np.float64)
        if arr.shape != tensor.values.shape:
            raise ValueError(
                f"{path}: parameter {name!r} has shape {arr.shape}, expected {tensor.values.shape}"
            )
        tensor.values[...] = arr

    tc = payload["train_config"]
    clf = ResidualGatClassifier(
        max_features=vocab.max_features,
        ngram_mode=vocab.ngram_mode,
        sim_threshold=float(payload["graph"]["sim_threshold"]),
        hidden_width=config.hidden_width,
        heads=config.heads,
        leaky_slope=config.leaky_slope,
        activation=config.activation,
        dropout_keep=config.dropout_keep,
        learning_rate=float(tc["learning_rate"]),
        epochs=int(tc["epochs"]),
        early_stop_patience=int(tc["early_stop_patience"]),
        class_weighting=str(tc["class_weighting"]),
        l2=float(tc["l2"]),
        val_fraction=float(tc["val_fraction"]),
        seed=int(tc["seed"]),
    )
    clf.vocabulary_ = vocab
    clf.model_ = model
    clf.classes_ = np.array([int(l) for l in Label], dtype=np.int64)
    return clf
