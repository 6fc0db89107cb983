"""Classical TF-IDF baselines: multinomial naive Bayes and softmax regression."""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted


def _as_dense(X) -> np.ndarray:
    if sp.issparse(X):
        X = X.toarray()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    return X


def _check_labels(X: np.ndarray, y) -> np.ndarray:
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise ValueError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    return y


class MultinomialNaiveBayes(BaseEstimator, ClassifierMixin):
    """Multinomial naive Bayes over non-negative feature rows.

    Class priors are empirical frequencies; feature likelihoods use
    additive smoothing ``alpha`` over the per-class feature mass.
    Prediction is the arg-max log posterior, ties to the lowest class.
    """

    def __init__(self, alpha: float = 1.0):
        self.alpha = alpha

    def fit(self, X, y):
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        X = _as_dense(X)
        y = _check_labels(X, y)
        if np.any(X < 0):
            raise ValueError("multinomial naive Bayes requires non-negative features")
        self.classes_ = np.unique(y)
        n_features = X.shape[1]
        log_prior = np.empty(len(self.classes_))
        log_likelihood = np.empty((len(self.classes_), n_features))
        for i, c in enumerate(self.classes_):
            rows = X[y == c]
            log_prior[i] = math.log(rows.shape[0] / X.shape[0])
            mass = rows.sum(axis=0) + self.alpha
            log_likelihood[i] = np.log(mass / mass.sum())
        self.log_prior_ = log_prior
        self.feature_log_prob_ = log_likelihood
        return self

    def _joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        return X @ self.feature_log_prob_.T + self.log_prior_

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "feature_log_prob_")
        X = _as_dense(X)
        if np.any(X < 0):
            raise ValueError("multinomial naive Bayes requires non-negative features")
        scores = self._joint_log_likelihood(X)
        return self.classes_[np.argmax(scores, axis=1)]


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Multinomial logistic regression via full-batch gradient descent.

    Weights and bias start at zero, so training is deterministic; ``seed``
    is accepted for interface symmetry with the other models but unused.
    The loss is mean cross-entropy plus ``l2 * ||W||^2`` (bias excluded).
    """

    def __init__(self, learning_rate: float = 1.0, epochs: int = 300, l2: float = 1e-4, seed: int = 0):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.l2 = l2
        self.seed = seed

    @staticmethod
    def _softmax(z: np.ndarray) -> np.ndarray:
        shifted = z - z.max(axis=1, keepdims=True)
        exps = np.exp(shifted)
        return exps / exps.sum(axis=1, keepdims=True)

    def _loss_and_grads(self, X, Y, W, b):
        n = X.shape[0]
        probs = self._softmax(X @ W + b)
        ce = -np.sum(Y * np.log(np.maximum(probs, 1e-300))) / n
        loss = ce + self.l2 * float(np.sum(W**2))
        delta = (probs - Y) / n
        grad_w = X.T @ delta + 2.0 * self.l2 * W
        grad_b = delta.sum(axis=0, keepdims=True)
        return loss, grad_w, grad_b

    def fit(self, X, y):
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        X = _as_dense(X)
        y = _check_labels(X, y)
        self.classes_ = np.unique(y)
        codes = np.searchsorted(self.classes_, y)
        Y = np.zeros((X.shape[0], len(self.classes_)))
        Y[np.arange(X.shape[0]), codes] = 1.0
        W = np.zeros((X.shape[1], len(self.classes_)))
        b = np.zeros((1, len(self.classes_)))
        for epoch in range(1, self.epochs + 1):
            loss, grad_w, grad_b = self._loss_and_grads(X, Y, W, b)
            if not math.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch}")
            W -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.coef_ = W
        self.intercept_ = b
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = _as_dense(X)
        return self._softmax(X @ self.coef_ + self.intercept_)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
