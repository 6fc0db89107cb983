"""Command-line surface: train, cv, eval, infer, report.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
All randomness flows from ``--seed`` and is split per purpose, so
identical invocations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .artifact import load_model, save_model
from .classifier import ResidualGatClassifier
from .config import ConfigError, load_config
from .corpus import LABELS, Label, load_corpus
from .training import (
    ConfusionMatrix,
    CvResult,
    Metrics,
    compute_metrics,
    cross_validate,
    cross_validate_baseline,
)

MODELS = ("rgat", "mnb", "logreg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docgat",
        description="Sentence-graph attention classifier for biomedical abstracts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_help: str) -> None:
        p.add_argument("--seed", type=int, default=42, help="base random seed (default 42)")
        p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
        p.add_argument("--out", type=Path, required=True, help=out_help)

    p_train = sub.add_parser("train", help="train on a labeled corpus and write a model artifact")
    p_train.add_argument("corpus", type=Path, help="corpus file (.jsonl or .csv)")
    common(p_train, "output directory (model.json, history.csv)")
    p_train.set_defaults(func=cmd_train)

    p_cv = sub.add_parser("cv", help="stratified k-fold cross-validation")
    p_cv.add_argument("corpus", type=Path)
    p_cv.add_argument("--k", type=int, default=5, help="fold count (default 5)")
    p_cv.add_argument("--model", choices=MODELS, default="rgat", help="model to evaluate")
    p_cv.add_argument(
        "--jobs", type=int, default=1,
        help="worker processes for fold runs; folds are independent, so this never changes results",
    )
    common(p_cv, "output directory (metrics.csv, summary.csv, history.csv, confusion.csv)")
    p_cv.set_defaults(func=cmd_cv)

    p_eval = sub.add_parser("eval", help="evaluate a saved artifact on a labeled corpus")
    p_eval.add_argument("corpus", type=Path)
    p_eval.add_argument("--artifact", type=Path, required=True)
    p_eval.add_argument("--out", type=Path, required=True, help="output directory")
    p_eval.set_defaults(func=cmd_eval)

    p_infer = sub.add_parser("infer", help="classify one abstract with a saved artifact")
    p_infer.add_argument("--artifact", type=Path, required=True)
    p_infer.add_argument("text", nargs="?", default=None, help="abstract text")
    p_infer.add_argument("--input", type=Path, default=None, help="read the abstract from a file")
    p_infer.set_defaults(func=cmd_infer)

    p_report = sub.add_parser("report", help="render metric CSVs as text tables")
    p_report.add_argument("metrics_dir", type=Path)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:  # pragma: no cover
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _history_rows(fold: int, history) -> list[list]:
    return [
        [fold, epoch, repr(tr), repr(vl)]
        for epoch, (tr, vl) in enumerate(zip(history.train_loss, history.val_loss), start=1)
    ]


def _metrics_rows(fold, metrics: Metrics) -> list[list]:
    return [
        [fold, label.display, repr(p), repr(r), repr(f1), metrics.support[label]]
        for label, (p, r, f1) in metrics.per_class.items()
    ]


def _confusion_rows(confusion: ConfusionMatrix) -> list[list]:
    return [
        [label.display] + [int(c) for c in confusion.counts[int(label)]]
        for label in LABELS
    ]


def cmd_train(args) -> int:
    config = load_config(args.config)
    corpus = load_corpus(args.corpus)
    corpus.require_labeled()
    clf = ResidualGatClassifier(
        max_features=config.max_features,
        ngram_mode=config.ngram_mode,
        sim_threshold=config.sim_threshold,
        hidden_width=config.hidden_width,
        heads=config.heads,
        leaky_slope=config.leaky_slope,
        activation=config.activation,
        dropout_keep=config.dropout_keep,
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        early_stop_patience=config.early_stop_patience,
        class_weighting=config.class_weighting,
        l2=config.l2,
        val_fraction=config.val_fraction,
        seed=args.seed,
    )
    clf.fit([d.text for d in corpus], [d.label for d in corpus])
    args.out.mkdir(parents=True, exist_ok=True)
    save_model(args.out / "model.json", clf)
    _write_csv(
        args.out / "history.csv",
        ["fold", "epoch", "train_loss", "val_loss"],
        _history_rows(0, clf.history_),
    )
    print(f"wrote {args.out / 'model.json'} (stopped at epoch {clf.history_.stopped_epoch})")
    return 0


def cmd_cv(args) -> int:
    config = load_config(args.config)
    corpus = load_corpus(args.corpus)
    if args.model == "rgat":
        result = cross_validate(corpus, config, k=args.k, seed=args.seed, n_jobs=args.jobs)
    else:
        result = cross_validate_baseline(
            corpus, config, model=args.model, k=args.k, seed=args.seed, n_jobs=args.jobs
        )
    args.out.mkdir(parents=True, exist_ok=True)
    _write_cv_outputs(args.out, result)
    print(
        f"{args.model}: macro-F1 {result.mean_macro_f1:.4f} "
        f"(+/- {result.std_macro_f1:.4f}), accuracy {result.mean_accuracy:.4f}"
    )
    return 0


def _write_cv_outputs(out: Path, result: CvResult) -> None:
    metrics_rows: list[list] = []
    for fold, fr in enumerate(result.folds):
        metrics_rows.extend(_metrics_rows(fold, fr.metrics))
    mean_support = {
        label: sum(fr.metrics.support[label] for fr in result.folds) for label in LABELS
    }
    for label in LABELS:
        triples = [fr.metrics.per_class[label] for fr in result.folds]
        means = [repr(float(np.mean([t[i] for t in triples]))) for i in range(3)]
        metrics_rows.append(["mean", label.display, *means, mean_support[label]])
    _write_csv(
        out / "metrics.csv",
        ["fold", "class", "precision", "recall", "f1", "support"],
        metrics_rows,
    )

    summary_rows: list[list] = [
        [fold, repr(fr.metrics.macro_f1), repr(fr.metrics.accuracy), "", ""]
        for fold, fr in enumerate(result.folds)
    ]
    summary_rows.append(
        [
            "mean",
            repr(result.mean_macro_f1),
            repr(result.mean_accuracy),
            repr(result.std_macro_f1),
            repr(result.std_accuracy),
        ]
    )
    _write_csv(
        out / "summary.csv",
        ["fold", "macro_f1", "accuracy", "macro_f1_stdev", "accuracy_stdev"],
        summary_rows,
    )

    history_rows: list[list] = []
    for fold, fr in enumerate(result.folds):
        if fr.history is not None:
            history_rows.extend(_history_rows(fold, fr.history))
    _write_csv(out / "history.csv", ["fold", "epoch", "train_loss", "val_loss"], history_rows)

    _write_csv(
        out / "confusion.csv",
        ["class"] + [label.display for label in LABELS],
        _confusion_rows(result.pooled_confusion),
    )


def cmd_eval(args) -> int:
    clf = load_model(args.artifact)
    corpus = load_corpus(args.corpus)
    corpus.require_labeled()
    y_true = np.array([int(d.label) for d in corpus], dtype=np.int64)
    y_pred = clf.predict([d.text for d in corpus])
    metrics, confusion = compute_metrics(y_true, y_pred)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        args.out / "metrics.csv",
        ["fold", "class", "precision", "recall", "f1", "support"],
        _metrics_rows(0, metrics),
    )
    _write_csv(
        args.out / "confusion.csv",
        ["class"] + [label.display for label in LABELS],
        _confusion_rows(confusion),
    )
    print(f"macro-F1 {metrics.macro_f1:.4f}, accuracy {metrics.accuracy:.4f}")
    return 0


def format_probabilities(probs) -> list[str]:
    """Six-decimal strings that sum to exactly 1.000000.

    Largest-remainder rounding on a 1e-6 grid; at most one printed value
    differs from plain rounding, by one unit in the last place per
    residual step.
    """
    scaled = np.asarray(probs, dtype=np.float64) * 1_000_000
    floors = np.floor(scaled).astype(np.int64)
    remainder = int(round(1_000_000 - floors.sum()))
    order = np.argsort(-(scaled - floors), kind="stable")
    units = floors.copy()
    for i in range(abs(remainder)):
        units[order[i % len(units)]] += 1 if remainder > 0 else -1
    return [f"{u / 1_000_000:.6f}" for u in units]


def cmd_infer(args) -> int:
    if (args.text is None) == (args.input is None):
        print("error: provide exactly one of TEXT or --input", file=sys.stderr)
        return 2
    text = args.input.read_text("utf-8") if args.input is not None else args.text
    if not text or not text.strip():
        print("error: input text is empty", file=sys.stderr)
        return 2
    clf = load_model(args.artifact)
    probs = clf.predict_proba([text])[0]
    label = Label(int(np.argmax(probs))).display
    print(f"{label} " + " ".join(format_probabilities(probs)))
    return 0


def cmd_report(args) -> int:
    metrics_path = args.metrics_dir / "metrics.csv"
    confusion_path = args.metrics_dir / "confusion.csv"
    for path in (metrics_path, confusion_path):
        if not path.exists():
            raise FileNotFoundError(f"missing metrics file: {path}")

    per_class: dict[str, list[tuple[float, float, float, int]]] = {l.display: [] for l in LABELS}
    with metrics_path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["fold"] == "mean":
                continue
            per_class[row["class"]].append(
                (float(row["precision"]), float(row["recall"]), float(row["f1"]), int(row["support"]))
            )

    print(f"{'class':<10} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>9}")
    for label in LABELS:
        rows = per_class[label.display]
        if not rows:
            raise ValueError(f"metrics.csv has no rows for class {label.display!r}")
        p = float(np.mean([r[0] for r in rows]))
        r = float(np.mean([r[1] for r in rows]))
        f1 = float(np.mean([r[2] for r in rows]))
        support = sum(r[3] for r in rows)
        print(f"{label.display:<10} {p:>9.3f} {r:>9.3f} {f1:>9.3f} {support:>9d}")

    counts = np.zeros((len(LABELS), len(LABELS)), dtype=np.int64)
    with confusion_path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(Label.parse(row["class"]))
            for label in LABELS:
                counts[i, int(label)] = int(row[label.display])

    print()
    print("confusion matrix (row-normalized, %):")
    header = " ".join(f"{l.display:>9}" for l in LABELS)
    print(f"{'true/pred':<10} {header}")
    totals = counts.sum(axis=1, keepdims=True)
    percents = np.divide(counts * 100.0, totals, out=np.zeros_like(counts, dtype=float), where=totals > 0)
    for label in LABELS:
        cells = " ".join(f"{percents[int(label), int(c)]:>9.1f}" for c in LABELS)
        print(f"{label.display:<10} {cells}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
