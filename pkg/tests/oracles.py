"""Independent reference implementations used as test oracles.

Plain dict/loop code on purpose: these share nothing with the library
paths they check.
"""

import math

import numpy as np


def brute_force_tfidf(unit_terms, docs_terms, terms_to_index):
    """Direct evaluation of tf * smoothed-idf with L2 scaling."""
    n_docs = len(docs_terms)
    dense = [0.0] * len(terms_to_index)
    for term, idx in terms_to_index.items():
        tf = sum(1 for t in unit_terms if t == term)
        if tf == 0:
            continue
        df = sum(1 for doc in docs_terms if term in set(doc))
        idf = math.log((1 + n_docs) / (1 + df)) + 1.0
        dense[idx] = tf * idf
    norm = math.sqrt(sum(w * w for w in dense))
    if norm > 0:
        dense = [w / norm for w in dense]
    return dense


def on_segment(point, a, b, tol=1e-12):
    """True if point = a + lam * (b - a) for some lam in [0, 1]."""
    point, a, b = (np.asarray(v, dtype=float) for v in (point, a, b))
    d = b - a
    lam = None
    for k in range(len(point)):
        if abs(d[k]) > tol:
            lam = (point[k] - a[k]) / d[k]
            break
    if lam is None:
        return bool(np.all(np.abs(point - a) <= tol))
    if not -tol <= lam <= 1 + tol:
        return False
    return bool(np.all(np.abs(a + lam * d - point) <= tol))
