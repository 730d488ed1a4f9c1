"""Text normalization, stemming and fixed-length integer encoding."""

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from .porter import stem_token

__all__ = [
    "PAD_INDEX",
    "UNK_INDEX",
    "STOPWORDS",
    "Vocabulary",
    "normalize_and_tokenize",
    "remove_stopwords",
    "stem_token",
    "preprocess_review",
    "build_vocabulary",
    "encode_fixed",
]

PAD_INDEX = 0
UNK_INDEX = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

# ASCII letters only; every other code point (digits, punctuation, non-ASCII
# letters) is a separator.
_ALPHA_RUN = re.compile(r"[A-Za-z]+")


def _load_stopwords() -> frozenset:
    text = resources.files(__package__).joinpath("resources/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def normalize_and_tokenize(text: str) -> list[str]:
    return [run.lower() for run in _ALPHA_RUN.findall(text)]


def remove_stopwords(tokens: Iterable[str], stopwords: frozenset = STOPWORDS) -> list[str]:
    return [t for t in tokens if t not in stopwords]


def preprocess_review(review_text: str, summary: str) -> list[str]:
    """Full text recipe for one review: join, tokenize, drop stopwords, stem."""
    tokens = normalize_and_tokenize(review_text + " " + summary)
    return [stem_token(t) for t in remove_stopwords(tokens)]


@dataclass(frozen=True)
class Vocabulary:
    """Token -> index map. Index 0 is padding and 1 is the unknown bucket."""

    token_to_index: Mapping[str, int]
    max_size: int
    _tokens: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = sorted(self.token_to_index.items(), key=lambda kv: kv[1])
        expected = list(range(2, 2 + len(ordered)))
        if [i for _, i in ordered] != expected:
            raise ValueError("vocabulary indices must be contiguous from 2")
        if len(ordered) + 2 > self.max_size:
            raise ValueError(f"vocabulary has {len(ordered) + 2} entries, cap is {self.max_size}")
        object.__setattr__(self, "_tokens", (PAD_TOKEN, UNK_TOKEN) + tuple(t for t, _ in ordered))

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK_INDEX)

    def token(self, index: int) -> str:
        return self._tokens[index]

    def to_text(self) -> str:
        """Serialize as ``index<TAB>token`` lines sorted by index."""
        lines = [f"# max_size={self.max_size}"]
        lines += [f"{i}\t{tok}" for i, tok in enumerate(self._tokens)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Vocabulary":
        max_size = None
        mapping = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line:
                continue
            if line.startswith("# max_size="):
                max_size = int(line.split("=", 1)[1])
                continue
            try:
                idx_s, tok = line.split("\t")
                idx = int(idx_s)
            except ValueError:
                raise ValueError(f"vocabulary line {lineno}: expected 'index<TAB>token'") from None
            if idx == PAD_INDEX and tok == PAD_TOKEN or idx == UNK_INDEX and tok == UNK_TOKEN:
                continue
            mapping[tok] = idx
        if max_size is None:
            max_size = len(mapping) + 2
        return cls(mapping, max_size)


def build_vocabulary(train_token_lists: Iterable[Iterable[str]], max_size: int) -> Vocabulary:
    """Rank training tokens by frequency (ties lexicographic) and keep the top ``max_size - 2``."""
    if max_size < 3:
        raise ValueError(f"max_size must be >= 3, got {max_size}")
    counts = Counter()
    for tokens in train_token_lists:
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[: max_size - 2]
    return Vocabulary({tok: i + 2 for i, (tok, _) in enumerate(ranked)}, max_size)


def encode_fixed(tokens: Iterable[str], vocab: Vocabulary, length: int) -> np.ndarray:
    """Map the first ``length`` tokens to ids and right-pad with 0."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    ids = np.zeros(length, dtype=np.int64)
    for pos, tok in enumerate(tokens):
        if pos >= length:
            break
        ids[pos] = vocab.index(tok)
    return ids
