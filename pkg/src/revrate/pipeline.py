"""End-to-end glue: split -> preprocessing artifacts -> model fitting -> predictors."""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import baselines
from .corpus import Dataset, Review
from .dnn import DnnArch, DnnTrainConfig, predict_batch, train_dnn
from .features import (FeatureContext, EncodedExample, bow_matrix, bow_vector, build_context,
                       encode_example, side_features)
from .textpipe import Vocabulary, build_vocabulary, preprocess_review

MODEL_KINDS = ("mnb", "logreg", "dnn")


@dataclass(frozen=True)
class Profile:
    name: str
    vocab_size: int
    seq_len: int
    epochs: int
    learning_rate: float = 0.01
    batch_size: int = 128
    embed_dim: int = 32
    hidden: int = 100
    id_embed_dim: int = 20


DESK = Profile("desk", vocab_size=2000, seq_len=50, epochs=10)
PAPER = Profile("paper", vocab_size=10_000, seq_len=100, epochs=100)
PROFILES = {p.name: p for p in (DESK, PAPER)}


@dataclass(frozen=True)
class Options:
    """Feature and prediction switches shared by every model kind."""

    engineered_counts: bool = False
    expected_rating: bool = False
    nb_alpha: float = 1.0
    lr_learning_rate: float = 0.1
    lr_epochs: int = 500
    lr_l2: float = 1e-4


@dataclass
class Prepared:
    vocab: Vocabulary
    ctx: FeatureContext
    train_tokens: list
    test_tokens: list
    train: list          # EncodedExample
    test: list

    def bows(self, which: str) -> list:
        tokens = self.train_tokens if which == "train" else self.test_tokens
        return [bow_vector(t, self.vocab) for t in tokens]


def tokenize_all(reviews: Sequence[Review]) -> list:
    return [preprocess_review(r.review_text, r.summary) for r in reviews]


def build_artifacts(train_reviews: Sequence[Review], profile: Profile):
    tokens = tokenize_all(train_reviews)
    return build_vocabulary(tokens, profile.vocab_size), build_context(train_reviews)


def prepare(dataset: Dataset, profile: Profile, vocab: Vocabulary = None,
            ctx: FeatureContext = None) -> Prepared:
    train_reviews, test_reviews = dataset.train, dataset.test
    train_tokens = tokenize_all(train_reviews)
    test_tokens = tokenize_all(test_reviews)
    if vocab is None:
        vocab = build_vocabulary(train_tokens, profile.vocab_size)
    if ctx is None:
        ctx = build_context(train_reviews)

    def enc(reviews, toks):
        return [encode_example(r, vocab, ctx, profile.seq_len, tokens=t) for r, t in zip(reviews, toks)]

    return Prepared(vocab, ctx, train_tokens, test_tokens,
                    enc(train_reviews, train_tokens), enc(test_reviews, test_tokens))


def logreg_matrix(bows: Sequence[dict], examples: Sequence[EncodedExample], vocab: Vocabulary,
                  ctx: FeatureContext, with_counts: bool) -> np.ndarray:
    """Bag-of-words counts followed by the dense side features."""
    side = np.stack([side_features(e, ctx, with_counts) for e in examples])
    return np.hstack([bow_matrix(bows, len(vocab)), side])


def dnn_arch(prep: Prepared, profile: Profile, with_counts: bool) -> DnnArch:
    ctx = prep.ctx
    return DnnArch(
        vocab_size=len(prep.vocab),
        n_reviewers=ctx.n_reviewers,
        n_items=ctx.n_items,
        embed_dim=profile.embed_dim,
        hidden=profile.hidden,
        id_embed_dim=profile.id_embed_dim,
        count_scale=(ctx.max_reviewer_count, ctx.max_item_count) if with_counts else None,
    )


def dnn_config(profile: Profile, seed: int, epochs: int = None) -> DnnTrainConfig:
    return DnnTrainConfig(learning_rate=profile.learning_rate, epochs=epochs or profile.epochs,
                          batch_size=profile.batch_size, seed=seed)


def fit(kind: str, prep: Prepared, profile: Profile, seed: int, options: Options = Options(),
        epochs: int = None, validate: bool = True):
    """Fit one model kind. Returns ``(model, LossCurve or None)``."""
    if kind == "mnb":
        examples = list(zip(prep.bows("train"), (e.target for e in prep.train)))
        return baselines.nb_fit(examples, len(prep.vocab), options.nb_alpha), None
    if kind == "logreg":
        X = logreg_matrix(prep.bows("train"), prep.train, prep.vocab, prep.ctx, options.engineered_counts)
        y = np.array([e.target for e in prep.train])
        model = baselines.lr_fit(X, y, learning_rate=options.lr_learning_rate, epochs=options.lr_epochs,
                                 l2_lambda=options.lr_l2, seed=seed)
        return model, None
    if kind == "dnn":
        arch = dnn_arch(prep, profile, options.engineered_counts)
        return train_dnn(prep.train, prep.test if validate else None,
                         dnn_config(profile, seed, epochs), arch)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def batch_predictor(kind: str, model, prep: Prepared, options: Options = Options()) -> Callable:
    """Return ``predict(examples, tokens) -> ratings`` for a fitted model."""
    if kind == "mnb":
        rule = baselines.nb_expected_rating if options.expected_rating else baselines.nb_predict

        def predict(examples, tokens):
            return np.array([rule(model, bow_vector(t, prep.vocab)) for t in tokens], dtype=np.float64)
    elif kind == "logreg":
        rule = baselines.lr_expected_rating if options.expected_rating else baselines.lr_predict

        def predict(examples, tokens):
            X = logreg_matrix([bow_vector(t, prep.vocab) for t in tokens], examples, prep.vocab,
                              prep.ctx, options.engineered_counts)
            return np.array([rule(model, x) for x in X], dtype=np.float64)
    elif kind == "dnn":
        def predict(examples, tokens):
            return predict_batch(model, examples, clamp=True)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return predict
