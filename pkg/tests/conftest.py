import numpy as np
import pytest

from docgat.corpus import Corpus, Document, Label
from docgat.datasets import make_synthetic_corpus


@pytest.fixture(scope="session")
def tiny_corpus() -> Corpus:
    """Eighty synthetic abstracts, enough for a fast 2-fold CV run."""
    return make_synthetic_corpus(n_docs=80, seed=11, label_noise=0.0)


@pytest.fixture()
def four_docs() -> list[Document]:
    return [
        Document("a", "Thyroid nodule ultrasonography follow up.", Label.THYROID),
        Document("b", "Colonoscopy screening for colorectal polyps.", Label.COLON),
        Document("c", "Squamous lung carcinoma staging review.", Label.LUNG),
        Document("d", "Community exercise and nutrition program.", Label.GENERIC),
    ]


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed)
