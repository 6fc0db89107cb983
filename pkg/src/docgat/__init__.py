"""Sentence-graph attention classification of biomedical abstracts.

Builds one graph per document (sentence nodes, TF-IDF features,
sequence + similarity edges), trains a residual multi-head graph
attention network on top of a small reverse-mode differentiation core,
and ships classical TF-IDF baselines plus a stratified cross-validation
harness and CLI.
"""

from .artifact import FORMAT_VERSION, load_model, save_model
from .baselines import MultinomialNaiveBayes, SoftmaxRegression
from .classifier import ResidualGatClassifier
from .config import ConfigError, PipelineConfig, load_config
from .corpus import (
    Corpus,
    Document,
    FoldPlan,
    Label,
    LABELS,
    load_corpus,
    save_corpus,
    stratified_kfold,
)
from .datasets import make_synthetic_corpus
from .features import (
    FeatureVector,
    TfidfFeaturizer,
    Vocabulary,
    document_vector,
    fit_vocabulary,
    tfidf_transform,
)
from .graphs import (
    DocumentGraph,
    build_document_graph,
    build_graph_from_sentences,
    neighbors,
    permute_graph,
)
from .model import (
    GatLayerConfig,
    ModelConfig,
    ResidualGatModel,
    forward_probabilities,
    init_params,
)
from .preprocess import split_sentences, tokenize
from .sampling import SmoteOversampler, smote_oversample
from .training import (
    ConfusionMatrix,
    CvResult,
    Metrics,
    TrainConfig,
    TrainHistory,
    compute_metrics,
    cross_validate,
    cross_validate_baseline,
    evaluate,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConfusionMatrix",
    "Corpus",
    "CvResult",
    "Document",
    "DocumentGraph",
    "FORMAT_VERSION",
    "FeatureVector",
    "FoldPlan",
    "GatLayerConfig",
    "Label",
    "LABELS",
    "Metrics",
    "ModelConfig",
    "MultinomialNaiveBayes",
    "PipelineConfig",
    "ResidualGatClassifier",
    "ResidualGatModel",
    "SmoteOversampler",
    "SoftmaxRegression",
    "TfidfFeaturizer",
    "TrainConfig",
    "TrainHistory",
    "Vocabulary",
    "build_document_graph",
    "build_graph_from_sentences",
    "compute_metrics",
    "cross_validate",
    "cross_validate_baseline",
    "document_vector",
    "evaluate",
    "fit_vocabulary",
    "forward_probabilities",
    "init_params",
    "load_config",
    "load_corpus",
    "load_model",
    "make_synthetic_corpus",
    "neighbors",
    "permute_graph",
    "save_corpus",
    "save_model",
    "smote_oversample",
    "split_sentences",
    "stratified_kfold",
    "tfidf_transform",
    "tokenize",
    "train",
]
