"""Per-document sentence graphs: TF-IDF node rows plus a weighted adjacency."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse as sp

from .corpus import Document, Label
from .features import Vocabulary, sentence_terms, stack_vectors, tfidf_transform
from .preprocess import sentence_token_lists

DEFAULT_SIM_THRESHOLD = 0.35

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class DocumentGraph:
    """Sentence nodes with feature rows and a symmetric weighted adjacency.

    ``node_features`` is an N x F CSR matrix of per-sentence TF-IDF rows
    (rows are sparse, so graphs stay small even at large vocabularies).
    ``edges`` holds (i, j, weight) triples in canonical sorted order; the
    set is symmetric, every node carries a (i, i, 1.0) self-loop, and
    weights lie in [0, 1].
    """

    node_features: sp.csr_matrix
    edges: tuple[Edge, ...]
    n_nodes: int
    label: Label | None = None
    doc_id: str | None = None

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise ValueError("a graph needs at least one node")
        if self.node_features.shape[0] != self.n_nodes:
            raise ValueError(
                f"feature rows {self.node_features.shape[0]} != n_nodes {self.n_nodes}"
            )
        for i, j, w in self.edges:
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range for {self.n_nodes} nodes")
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"edge ({i}, {j}) weight {w} outside [0, 1]")

    def adjacency_mask(self) -> np.ndarray:
        """Boolean N x N mask of which pairs are connected."""
        mask = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        for i, j, _ in self.edges:
            mask[i, j] = True
        return mask


def validate_graph(graph: DocumentGraph) -> None:
    """Exhaustive invariant scan: symmetry, self-loops, weight range."""
    present = {(i, j): w for i, j, w in graph.edges}
    for (i, j), w in present.items():
        if present.get((j, i)) != w:
            raise AssertionError(f"edge ({i}, {j}) has no symmetric twin with weight {w}")
    for i in range(graph.n_nodes):
        if present.get((i, i)) != 1.0:
            raise AssertionError(f"node {i} is missing its self-loop")


def build_graph_from_sentences(
    token_lists: Sequence[Sequence[str]],
    vocab: Vocabulary,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
    label: Label | None = None,
    doc_id: str | None = None,
) -> DocumentGraph:
    """Build a sentence graph from pre-tokenized sentences.

    One node per sentence with its TF-IDF row; edges are sequential links
    (i, i+1) at weight 1.0 plus cosine-similarity links wherever
    cos(x_i, x_j) >= sim_threshold (both rows non-zero), plus self-loops.
    Duplicate edges keep the maximum weight. If every sentence is
    out-of-vocabulary the graph degenerates to a single zero-feature node.
    """
    if not 0.0 <= sim_threshold <= 1.0:
        raise ValueError(f"sim_threshold must be in [0, 1], got {sim_threshold}")
    if not token_lists:
        raise ValueError(f"document {doc_id!r}: no sentences")
    vectors = [
        tfidf_transform(sentence_terms(toks, vocab.ngram_mode), vocab)
        for toks in token_lists
    ]
    if all(v.nnz == 0 for v in vectors):
        features = sp.csr_matrix((1, vocab.size))
        return DocumentGraph(features, ((0, 0, 1.0),), 1, label=label, doc_id=doc_id)

    n = len(vectors)
    features = stack_vectors(vectors)
    weights: dict[tuple[int, int], float] = {(i, i): 1.0 for i in range(n)}

    def put(i: int, j: int, w: float) -> None:
        w = min(max(w, 0.0), 1.0)
        for key in ((i, j), (j, i)):
            if weights.get(key, -1.0) < w:
                weights[key] = w

    for i in range(n - 1):
        put(i, i + 1, 1.0)
    if n > 1:
        # Rows are unit-norm (or zero), so cosines are plain dot products.
        sims = (features @ features.T).toarray()
        nonzero = np.array([v.nnz > 0 for v in vectors])
        for i in range(n):
            for j in range(i + 1, n):
                if nonzero[i] and nonzero[j] and sims[i, j] >= sim_threshold:
                    put(i, j, float(sims[i, j]))

    edges = tuple(sorted((i, j, w) for (i, j), w in weights.items()))
    return DocumentGraph(features, edges, n, label=label, doc_id=doc_id)


def build_document_graph(
    doc: Document,
    vocab: Vocabulary,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
) -> DocumentGraph:
    """Split, tokenize, and build the sentence graph for one document."""
    token_lists = sentence_token_lists(doc.text)
    return build_graph_from_sentences(
        token_lists, vocab, sim_threshold, label=doc.label, doc_id=doc.id
    )


def neighbors(graph: DocumentGraph, i: int) -> set[int]:
    """Neighbor set of node i; always contains i itself (self-loop)."""
    if not 0 <= i < graph.n_nodes:
        raise ValueError(f"node index {i} out of range for {graph.n_nodes} nodes")
    return {j for a, j, _ in graph.edges if a == i}


def permute_graph(graph: DocumentGraph, perm: Sequence[int]) -> DocumentGraph:
    """Relabel nodes so new node p is old node perm[p]."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(graph.n_nodes)):
        raise ValueError("perm must be a permutation of node indices")
    position = np.empty(graph.n_nodes, dtype=np.int64)
    position[perm] = np.arange(graph.n_nodes)
    features = graph.node_features[perm]
    edges = tuple(
        sorted((int(position[i]), int(position[j]), w) for i, j, w in graph.edges)
    )
    return DocumentGraph(features, edges, graph.n_nodes, label=graph.label, doc_id=graph.doc_id)


def graph_to_json(graph: DocumentGraph) -> str:
    """One-line JSON dump (debugging aid): node count, edges, label."""
    payload = {
        "n_nodes": graph.n_nodes,
        "edges": [[i, j, w] for i, j, w in graph.edges],
        "label": graph.label.display if graph.label is not None else None,
    }
    return json.dumps(payload, ensure_ascii=False)
