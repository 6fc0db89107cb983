"""Labeled abstract corpus: loading, validation, and stratified fold plans."""

from __future__ import annotations

import csv
import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .rng import split_rng

FORMATS = ("jsonl", "csv")


class Label(enum.IntEnum):
    """The four document classes. The name/code mapping is fixed."""

    THYROID = 0
    COLON = 1
    LUNG = 2
    GENERIC = 3

    @classmethod
    def parse(cls, name: str) -> "Label":
        """Case-insensitive name lookup; unknown names are an error, never a default."""
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown label: {name!r}") from None

    @property
    def display(self) -> str:
        return self.name.lower()


LABELS: tuple[Label, ...] = tuple(Label)


@dataclass(frozen=True)
class Document:
    """One abstract; ``label`` is absent only for inference inputs."""

    id: str
    text: str
    label: Label | None = None

    def __post_init__(self) -> None:
        if not str(self.text).strip():
            raise ValueError(f"document {self.id!r}: text is empty")


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i: int) -> Document:
        return self.documents[i]

    @property
    def class_counts(self) -> dict[Label, int]:
        counts = Counter(d.label for d in self.documents if d.label is not None)
        return {label: counts.get(label, 0) for label in LABELS}

    def labeled(self) -> tuple[Document, ...]:
        return tuple(d for d in self.documents if d.label is not None)

    def require_labeled(self) -> None:
        """Training entry points reject corpora with unlabeled documents."""
        for d in self.documents:
            if d.label is None:
                raise ValueError(f"document {d.id!r} has no label")


def _infer_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValueError(f"unknown corpus format: {fmt!r}")
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "jsonl"


def _parse_label(raw: object) -> Label | None:
    if raw is None:
        return None
    text = str(raw).strip()
    if not text:
        return None
    return Label.parse(text)


def load_corpus(path: str | Path, fmt: str | None = None) -> Corpus:
    """Load a corpus from a JSON Lines or CSV file.

    JSONL: one object per line with fields ``id`` and ``text`` (strings) and
    an optional ``label``. CSV: header row ``id,text,label`` with RFC-4180
    quoting. Malformed records raise errors naming the offending line.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    fmt = _infer_format(path, fmt)
    documents: list[Document] = []
    if fmt == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: malformed JSON record: {exc}") from None
                if not isinstance(record, dict):
                    raise ValueError(f"{path}:{lineno}: record is not an object")
                try:
                    documents.append(_record_to_document(record))
                except (KeyError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    else:
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "text"} <= set(reader.fieldnames):
                raise ValueError(f"{path}: CSV header must contain 'id' and 'text'")
            for record in reader:
                lineno = reader.line_num
                try:
                    documents.append(_record_to_document(record))
                except (KeyError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Corpus(tuple(documents))


def _record_to_document(record: dict) -> Document:
    for key in ("id", "text"):
        if record.get(key) in (None, ""):
            raise KeyError(f"missing field {key!r}")
    return Document(
        id=str(record["id"]),
        text=str(record["text"]),
        label=_parse_label(record.get("label")),
    )


def save_corpus(corpus: Corpus, path: str | Path, fmt: str | None = None) -> None:
    """Write a corpus so that a reload reproduces every field exactly."""
    path = Path(path)
    fmt = _infer_format(path, fmt)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for doc in corpus:
                record: dict[str, str] = {"id": doc.id, "text": doc.text}
                if doc.label is not None:
                    record["label"] = doc.label.display
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    else:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "text", "label"])
            for doc in corpus:
                writer.writerow([doc.id, doc.text, doc.label.display if doc.label else ""])


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every labeled document to one of ``k`` folds."""

    k: int
    assignments: dict[str, int] = field(compare=False)
    seed: int = 0

    def fold_ids(self, fold: int) -> tuple[str, ...]:
        return tuple(i for i, f in self.assignments.items() if f == fold)

    def split(self, corpus: Corpus, fold: int) -> tuple[list[Document], list[Document]]:
        """(train, test) documents for one fold, preserving corpus order."""
        if not 0 <= fold < self.k:
            raise ValueError(f"fold {fold} out of range for k={self.k}")
        train = [d for d in corpus if self.assignments[d.id] != fold]
        test = [d for d in corpus if self.assignments[d.id] == fold]
        return train, test


def stratified_kfold(corpus: Corpus, k: int, seed: int) -> FoldPlan:
    """Per-class seeded shuffle, then round-robin dealing to folds.

    Deterministic for a fixed seed; per-fold class counts differ by at most
    one from perfect stratification.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    corpus.require_labeled()
    rng = split_rng(seed, "folds")
    assignments: dict[str, int] = {}
    for label in LABELS:
        ids = [d.id for d in corpus if d.label is label]
        if len(ids) < k:
            raise ValueError(
                f"class {label.display!r} has {len(ids)} documents, need at least {k}"
            )
        order = rng.permutation(len(ids))
        for pos, idx in enumerate(order):
            assignments[ids[idx]] = pos % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)
