"""Synthetic demo corpus with the shape of the real abstract dataset.

The released dataset ships separately; this generator produces a stand-in
of matching size and structure (four imbalanced classes, roughly
200-word documents) from topical keyword pools so that the pipeline,
harness, and acceptance checks can run self-contained. Generation is
fully deterministic per seed.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, Document, Label
from .rng import split_rng

# Topical pools, most characteristic words first (earlier entries are
# sampled more often). Overlap across pools is intentional: shared
# oncology and general-medicine terms keep the classes from being
# trivially separable on a single keyword.
_TOPICS: dict[Label, tuple[str, ...]] = {
    Label.THYROID: (
        "thyroid", "papillary", "follicular", "thyroidectomy", "nodule",
        "goiter", "thyroglobulin", "thyrotropin", "radioiodine", "iodine",
        "telomerase", "telomere", "medullary", "calcitonin", "parathyroid",
        "levothyroxine", "hashimoto", "graves", "hyperthyroidism",
        "hypothyroidism", "isthmus", "cervical", "neck", "ultrasonography",
        "braf", "ret", "fine-needle", "aspiration",
    ),
    Label.COLON: (
        "colon", "colorectal", "rectal", "polyp", "adenoma", "colonoscopy",
        "bowel", "rectum", "colectomy", "mucosa", "kras", "apc", "lynch",
        "microsatellite", "sigmoid", "cecum", "stool", "fecal", "occult",
        "mesenteric", "peritoneal", "colitis", "anastomosis", "crohn",
        "ileum", "appendix", "diverticular",
    ),
    Label.LUNG: (
        "lung", "pulmonary", "bronchogenic", "squamous", "bronchial",
        "nitrosourea", "oat", "mesothelioma", "pleural", "smoking",
        "tobacco", "egfr", "alk", "emphysema", "airway", "bronchoscopy",
        "lobectomy", "thoracic", "mediastinal", "hilar", "pneumonectomy",
        "spirometry", "dyspnea", "copd", "nonsmall", "asbestos",
    ),
    Label.GENERIC: (
        "wellness", "lifestyle", "vaccination", "influenza", "diabetes",
        "hypertension", "cardiovascular", "obesity", "nutrition",
        "exercise", "mental", "depression", "anxiety", "telemedicine",
        "insurance", "workforce", "education", "sanitation", "guidelines",
        "adherence", "immunization", "dietary", "sedentary", "mindfulness",
        "burnout", "literacy", "equity", "telehealth",
    ),
}

# Oncology vocabulary shared by the three cancer classes.
_ONCOLOGY = (
    "tumor", "carcinoma", "cancer", "metastasis", "malignant", "benign",
    "oncology", "chemotherapy", "radiotherapy", "biopsy", "staging",
    "prognosis", "relapse", "remission", "adjuvant", "cisplatin",
    "vincristine", "bleomycin", "adriamycin", "cyclophosphamide",
    "methotrexate", "immunotherapy", "histology", "lesion", "margin",
    "resection", "recurrence", "grade", "lymph", "node",
)

# General clinical-research vocabulary used by every class.
_GENERAL = (
    "patients", "study", "clinical", "treatment", "results", "analysis",
    "data", "method", "trial", "cohort", "outcome", "risk", "therapy",
    "diagnosis", "disease", "health", "care", "hospital", "significant",
    "association", "baseline", "followup", "incidence", "prevalence",
    "mortality", "morbidity", "evaluation", "assessment", "response",
    "management", "intervention", "population", "sample", "report",
    "review", "evidence", "cases", "years", "survival", "screening",
)

# Function words; the tokenizer filters these, which keeps the raw text
# realistic without adding signal.
_FUNCTION = (
    "the", "of", "and", "in", "to", "with", "for", "was", "were", "is",
    "are", "we", "this", "that", "a", "an", "on", "by", "as", "from",
    "at", "or", "be", "been", "after", "between", "during",
)

DEFAULT_PROPORTIONS = (0.30, 0.27, 0.23, 0.20)


def _pick(rng: np.random.Generator, pool: tuple[str, ...], skew: float = 1.6) -> str:
    # Power-law index: early pool entries dominate, mimicking topical terms.
    idx = int(len(pool) * rng.random() ** skew)
    return pool[min(idx, len(pool) - 1)]


def _sentence(rng: np.random.Generator, label: Label, crosstalk: float) -> str:
    n_words = int(rng.integers(10, 19))
    words = []
    other_labels = [l for l in Label if l is not label]
    for _ in range(n_words):
        u = rng.random()
        if u < 0.22:
            if rng.random() < crosstalk:
                words.append(_pick(rng, _TOPICS[other_labels[int(rng.integers(3))]]))
            else:
                words.append(_pick(rng, _TOPICS[label]))
        elif u < 0.40:
            if label is Label.GENERIC:
                words.append(_pick(rng, _GENERAL))
            else:
                words.append(_pick(rng, _ONCOLOGY))
        elif u < 0.70:
            words.append(_pick(rng, _GENERAL))
        else:
            words.append(_FUNCTION[int(rng.integers(len(_FUNCTION)))])
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def make_synthetic_corpus(
    n_docs: int = 1874,
    seed: int = 7,
    proportions: tuple[float, float, float, float] = DEFAULT_PROPORTIONS,
    crosstalk: float = 0.12,
    label_noise: float = 0.03,
) -> Corpus:
    """Deterministic labeled corpus of keyword-pool abstracts.

    ``proportions`` sets the (imbalanced) class mix; ``crosstalk`` is the
    probability that a topical slot borrows a term from another class;
    ``label_noise`` flips that fraction of labels to a random other
    class, bounding achievable accuracy the way curation errors do in
    real corpora.
    """
    if n_docs < len(Label):
        raise ValueError(f"need at least {len(Label)} documents, got {n_docs}")
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ValueError("class proportions must sum to 1")
    if not 0.0 <= label_noise < 1.0:
        raise ValueError(f"label_noise must be in [0, 1), got {label_noise}")
    rng = split_rng(seed, "data")

    counts = [int(p * n_docs) for p in proportions]
    for i in range(n_docs - sum(counts)):  # distribute the rounding remainder
        counts[i % len(counts)] += 1
    labels: list[Label] = []
    for label, count in zip(Label, counts):
        labels.extend([label] * count)
    order = rng.permutation(n_docs)

    documents = []
    for pos, idx in enumerate(order):
        label = labels[int(idx)]
        n_sentences = int(rng.integers(7, 12))
        text = " ".join(_sentence(rng, label, crosstalk) for _ in range(n_sentences))
        if label_noise and rng.random() < label_noise:
            others = [l for l in Label if l is not label]
            label = others[int(rng.integers(3))]
        documents.append(Document(id=f"syn-{pos:05d}", text=text, label=label))
    return Corpus(tuple(documents))
