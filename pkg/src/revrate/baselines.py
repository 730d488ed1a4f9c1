"""Multinomial naive Bayes and softmax logistic regression over ratings 1..5."""

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .numerics import check_finite, log_softmax, softmax
from .textpipe import UNK_INDEX

log = logging.getLogger(__name__)

CLASSES = np.arange(1, 6)
N_CLASSES = len(CLASSES)


def _rating_index(target) -> int:
    r = int(target)
    if r not in (1, 2, 3, 4, 5):
        raise ValueError(f"target rating must be in 1..5, got {target!r}")
    return r - 1


def _argmax_lowest(scores: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the smallest rating on ties
    return int(np.argmax(scores))


# --- multinomial naive Bayes -------------------------------------------------------

# Token features start at vocabulary index 2: padding is never counted and the
# unknown bucket is dropped, so NB sees exactly the vocabulary's real stems.
NB_FIRST_FEATURE = UNK_INDEX + 1


@dataclass(frozen=True)
class NbModel:
    class_log_priors: np.ndarray             # [5]; -inf for ratings absent from training
    class_token_log_likelihoods: np.ndarray  # [5, V], column j <-> vocabulary index j + 2
    smoothing_alpha: float = 1.0

    @property
    def n_features(self) -> int:
        return self.class_token_log_likelihoods.shape[1]


def _bow_to_dense(bow: Mapping[int, int], n_features: int) -> np.ndarray:
    x = np.zeros(n_features)
    for idx, count in bow.items():
        j = idx - NB_FIRST_FEATURE
        if 0 <= j < n_features:
            x[j] += count
    return x


def nb_fit(examples: Sequence[tuple], vocab_size: int, alpha: float = 1.0) -> NbModel:
    """Fit on ``(bow, rating)`` pairs. ``vocab_size`` counts the two reserved indices."""
    if not examples:
        raise ValueError("nb_fit needs at least one training example")
    if alpha <= 0:
        raise ValueError("smoothing alpha must be positive")
    n_features = vocab_size - NB_FIRST_FEATURE
    if n_features < 1:
        raise ValueError("vocabulary has no token features")
    class_counts = np.zeros(N_CLASSES)
    token_counts = np.zeros((N_CLASSES, n_features))
    for bow, target in examples:
        c = _rating_index(target)
        class_counts[c] += 1
        token_counts[c] += _bow_to_dense(bow, n_features)
    with np.errstate(divide="ignore"):
        log_priors = np.log(class_counts) - np.log(class_counts.sum())
    smoothed = token_counts + alpha
    log_lik = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return NbModel(log_priors, log_lik, alpha)


def nb_log_joint(model: NbModel, bow: Mapping[int, int]) -> np.ndarray:
    """Unnormalized log posterior per rating: log prior + sum of count * log likelihood."""
    x = _bow_to_dense(bow, model.n_features)
    present = np.isfinite(model.class_log_priors)
    scores = np.full(N_CLASSES, -np.inf)
    scores[present] = model.class_log_priors[present] + model.class_token_log_likelihoods[present] @ x
    return scores


def nb_predict_proba(model: NbModel, bow: Mapping[int, int]) -> np.ndarray:
    scores = nb_log_joint(model, bow)
    present = np.isfinite(scores)
    p = np.zeros(N_CLASSES)
    p[present] = softmax(scores[present])
    return p


def nb_predict(model: NbModel, bow: Mapping[int, int]) -> int:
    return int(CLASSES[_argmax_lowest(nb_log_joint(model, bow))])


def nb_expected_rating(model: NbModel, bow: Mapping[int, int]) -> float:
    return float(nb_predict_proba(model, bow) @ CLASSES)


# --- logistic regression -------------------------------------------------------------

@dataclass
class LogRegModel:
    weights: np.ndarray   # [5, D]
    bias: np.ndarray      # [5]
    l2_lambda: float = 1e-4
    loss_history: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @classmethod
    def zeros(cls, n_features: int, l2_lambda: float = 1e-4) -> "LogRegModel":
        return cls(np.zeros((N_CLASSES, n_features)), np.zeros(N_CLASSES), l2_lambda)


def _one_hot_targets(y: np.ndarray) -> np.ndarray:
    Y = np.zeros((len(y), N_CLASSES))
    Y[np.arange(len(y)), [_rating_index(t) for t in y]] = 1.0
    return Y


def lr_loss_and_grad(weights: np.ndarray, bias: np.ndarray, X: np.ndarray, y, l2_lambda: float):
    """Mean softmax cross-entropy plus ``l2_lambda/2 * ||W||^2`` (bias unpenalized).

    Returns ``(loss, dW, db)``.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = _one_hot_targets(np.asarray(y))
    n = X.shape[0]
    logits = X @ weights.T + bias
    logp = log_softmax(logits, axis=1)
    loss = -np.sum(Y * logp) / n + 0.5 * l2_lambda * np.sum(weights * weights)
    delta = (np.exp(logp) - Y) / n
    dW = delta.T @ X + l2_lambda * weights
    db = delta.sum(axis=0)
    return float(loss), dW, db


def lr_fit(X, y, learning_rate: float = 0.1, epochs: int = 500, l2_lambda: float = 1e-4,
           seed: int = 0) -> LogRegModel:
    """Full-batch gradient descent from a zero initialization.

    The zero start makes the fit deterministic; ``seed`` is accepted so every
    model kind shares one config surface.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D [n, D] array (consistent feature width)")
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("lr_fit needs at least one training example")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
    model = LogRegModel.zeros(X.shape[1], l2_lambda)
    for epoch in range(epochs):
        loss, dW, db = lr_loss_and_grad(model.weights, model.bias, X, y, l2_lambda)
        model.loss_history.append(loss)
        model.weights -= learning_rate * dW
        model.bias -= learning_rate * db
    check_finite(model.weights, "logistic regression weights")
    final, _, _ = lr_loss_and_grad(model.weights, model.bias, X, y, l2_lambda)
    model.loss_history.append(final)
    log.debug("logreg fit: loss %.4f -> %.4f over %d epochs", model.loss_history[0], final, epochs)
    return model


def _check_width(model: LogRegModel, x: np.ndarray) -> None:
    if x.shape[-1] != model.n_features:
        raise ValueError(f"feature width {x.shape[-1]} does not match model width {model.n_features}")


def lr_predict_proba(model: LogRegModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    _check_width(model, x)
    return softmax(x @ model.weights.T + model.bias)


def lr_predict(model: LogRegModel, features) -> int:
    x = np.asarray(features, dtype=np.float64)
    _check_width(model, x)
    return int(CLASSES[_argmax_lowest(x @ model.weights.T + model.bias)])


def lr_expected_rating(model: LogRegModel, features) -> float:
    return float(lr_predict_proba(model, features) @ CLASSES)
