"""Side features (category, time, reviewer/item statistics) and example assembly."""

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import GENRES, Review
from .textpipe import UNK_INDEX, PAD_INDEX, Vocabulary, encode_fixed, preprocess_review

# Lexicographic, so the one-hot layout does not depend on prose order.
CATEGORY_ORDER = tuple(sorted(GENRES))
CONTEXT_FORMAT_VERSION = 1


def onehot_category(category: str, order: Sequence[str] = CATEGORY_ORDER) -> np.ndarray:
    try:
        pos = list(order).index(category)
    except ValueError:
        raise ValueError(f"unknown category {category!r}; expected one of {list(order)}") from None
    flags = np.zeros(len(order))
    flags[pos] = 1.0
    return flags


def normalize_time(t: int, time_min: int, time_max: int) -> float:
    """Min-max scale a timestamp into [0, 1], clamping outside the range."""
    if time_max <= time_min:
        raise ValueError(f"degenerate time range [{time_min}, {time_max}]")
    x = (t - time_min) / (time_max - time_min)
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class FeatureContext:
    """Statistics gathered from the training split only."""

    category_order: tuple
    time_min: int
    time_max: int
    reviewer_counts: Mapping[str, int]
    item_counts: Mapping[str, int]
    reviewer_index: Mapping[str, int]
    item_index: Mapping[str, int]

    @property
    def n_reviewers(self) -> int:
        """Rows needed in a reviewer table, including reserved row 0."""
        return len(self.reviewer_index) + 1

    @property
    def n_items(self) -> int:
        return len(self.item_index) + 1

    @property
    def max_reviewer_count(self) -> int:
        return max(self.reviewer_counts.values())

    @property
    def max_item_count(self) -> int:
        return max(self.item_counts.values())

    def time_norm(self, t: int) -> float:
        return normalize_time(t, self.time_min, self.time_max)

    def to_text(self) -> str:
        """Versioned plain-text serialization: tab separated, one section per field, ids JSON-quoted."""
        out = [f"revrate-context\t{CONTEXT_FORMAT_VERSION}", "[genres]"]
        out += list(self.category_order)
        out += ["[time]", f"min\t{self.time_min}", f"max\t{self.time_max}", "[reviewers]"]
        out += [f"{json.dumps(rid)}\t{self.reviewer_index[rid]}\t{self.reviewer_counts[rid]}"
                for rid in sorted(self.reviewer_index, key=self.reviewer_index.get)]
        out.append("[items]")
        out += [f"{json.dumps(iid)}\t{self.item_index[iid]}\t{self.item_counts[iid]}"
                for iid in sorted(self.item_index, key=self.item_index.get)]
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FeatureContext":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("revrate-context\t"):
            raise ValueError("not a feature-context file")
        version = int(lines[0].split("\t")[1])
        if version != CONTEXT_FORMAT_VERSION:
            raise ValueError(f"unsupported context format version {version}")
        sections: dict[str, list[str]] = {}
        current = None
        for line in lines[1:]:
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections[current] = []
            elif line:
                sections[current].append(line)
        times = dict(row.split("\t") for row in sections["time"])

        def ids(rows):
            index, counts = {}, {}
            for row in rows:
                key, idx, count = row.rsplit("\t", 2)
                key = json.loads(key)
                index[key] = int(idx)
                counts[key] = int(count)
            return index, counts

        r_index, r_counts = ids(sections.get("reviewers", []))
        i_index, i_counts = ids(sections.get("items", []))
        return cls(tuple(sections["genres"]), int(times["min"]), int(times["max"]),
                   r_counts, i_counts, r_index, i_index)


def build_context(train_reviews: Sequence[Review]) -> FeatureContext:
    if not train_reviews:
        raise ValueError("cannot build a feature context from an empty training split")
    times = [r.unix_review_time for r in train_reviews]
    time_min, time_max = min(times), max(times)
    if time_min == time_max:
        raise ValueError("training split has a single timestamp; time normalization is undefined")
    reviewer_counts = Counter(r.reviewer_id for r in train_reviews)
    item_counts = Counter(r.item_id for r in train_reviews)
    return FeatureContext(
        category_order=CATEGORY_ORDER,
        time_min=time_min,
        time_max=time_max,
        reviewer_counts=dict(reviewer_counts),
        item_counts=dict(item_counts),
        # 0 is the unknown row; ids get 1.. in sorted order
        reviewer_index={rid: i for i, rid in enumerate(sorted(reviewer_counts), 1)},
        item_index={iid: i for i, iid in enumerate(sorted(item_counts), 1)},
    )


def bow_vector(tokens: Iterable[str], vocab: Vocabulary) -> dict[int, int]:
    """Sparse unigram counts keyed by vocabulary index; unseen tokens count under 1."""
    counts = Counter(vocab.index(t) for t in tokens)
    counts.pop(PAD_INDEX, None)
    return dict(sorted(counts.items()))


@dataclass(frozen=True)
class EncodedExample:
    token_ids: np.ndarray
    category_onehot: np.ndarray
    time_norm: float
    reviewer_idx: int
    item_idx: int
    reviewer_history: int
    product_popularity: int
    target: int


def encode_example(review: Review, vocab: Vocabulary, ctx: FeatureContext, length: int,
                   tokens: Sequence[str] = None) -> EncodedExample:
    """Featurize one review. ``tokens`` may carry an already preprocessed token list."""
    if tokens is None:
        tokens = preprocess_review(review.review_text, review.summary)
    return EncodedExample(
        token_ids=encode_fixed(tokens, vocab, length),
        category_onehot=onehot_category(review.category, ctx.category_order),
        time_norm=ctx.time_norm(review.unix_review_time),
        reviewer_idx=ctx.reviewer_index.get(review.reviewer_id, 0),
        item_idx=ctx.item_index.get(review.item_id, 0),
        reviewer_history=ctx.reviewer_counts.get(review.reviewer_id, 0),
        product_popularity=ctx.item_counts.get(review.item_id, 0),
        target=review.overall,
    )


def engineered_counts(example: EncodedExample, ctx: FeatureContext) -> np.ndarray:
    """Reviewer history and product popularity, each scaled by its training maximum."""
    return np.array([
        example.reviewer_history / ctx.max_reviewer_count,
        example.product_popularity / ctx.max_item_count,
    ])


def side_features(example: EncodedExample, ctx: FeatureContext, with_counts: bool = False) -> np.ndarray:
    """Dense non-text features: category one-hot, normalized time, optional counts."""
    parts = [example.category_onehot, [example.time_norm]]
    if with_counts:
        parts.append(engineered_counts(example, ctx))
    return np.concatenate(parts)


def side_feature_width(with_counts: bool = False) -> int:
    return len(CATEGORY_ORDER) + 1 + (2 if with_counts else 0)


def bow_matrix(bows: Sequence[Mapping[int, int]], vocab_size: int) -> np.ndarray:
    """Dense [n, vocab_size] count matrix; column 0 (padding) stays zero."""
    X = np.zeros((len(bows), vocab_size))
    for row, bow in enumerate(bows):
        for idx, count in bow.items():
            X[row, idx] = count
    return X


__all__ = [
    "CATEGORY_ORDER", "FeatureContext", "EncodedExample", "onehot_category", "normalize_time",
    "build_context", "bow_vector", "encode_example", "engineered_counts", "side_features",
    "side_feature_width", "bow_matrix", "UNK_INDEX",
]
