"""Review records: parsing, validation, train/test split and descriptive statistics."""

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence, Union

GENRES = ("Pop", "Alternative Rock", "Jazz", "Classical", "Dance & Electronic")
RATINGS = (1, 2, 3, 4, 5)

# Input key -> Review attribute. Order is the record layout.
FIELD_MAP = {
    "reviewerID": "reviewer_id",
    "itemID": "item_id",
    "reviewText": "review_text",
    "summary": "summary",
    "overall": "overall",
    "price": "price",
    "reviewHash": "review_hash",
    "unixReviewTime": "unix_review_time",
    "reviewTime": "review_time",
    "category": "category",
}
REQUIRED_KEYS = frozenset(FIELD_MAP) - {"price"}


class ReviewError(ValueError):
    """A record failed to parse or validate. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Review:
    reviewer_id: str
    item_id: str
    review_text: str
    summary: str
    overall: int
    price: Optional[float]
    review_hash: str
    unix_review_time: int
    review_time: str
    category: str

    def __post_init__(self):
        if isinstance(self.overall, bool) or self.overall not in RATINGS:
            raise ReviewError(f"overall must be an integer in 1..5, got {self.overall!r}")
        if self.category not in GENRES:
            raise ReviewError(f"unknown category {self.category!r}")
        if isinstance(self.unix_review_time, bool) or not isinstance(self.unix_review_time, int):
            raise ReviewError(f"unixReviewTime must be an integer, got {self.unix_review_time!r}")
        if self.unix_review_time < 0:
            raise ReviewError(f"unixReviewTime must be >= 0, got {self.unix_review_time}")
        if self.price is not None and not (math.isfinite(self.price) and self.price >= 0):
            raise ReviewError(f"price must be a non-negative number, got {self.price!r}")

    def to_record(self) -> dict:
        return {key: getattr(self, attr) for key, attr in FIELD_MAP.items()}


def review_from_record(record: dict) -> Review:
    if not isinstance(record, dict):
        raise ReviewError("record is not a JSON object")
    missing = REQUIRED_KEYS - record.keys()
    if missing:
        raise ReviewError(f"missing keys: {', '.join(sorted(missing))}")
    unknown = record.keys() - FIELD_MAP.keys()
    if unknown:
        raise ReviewError(f"unknown keys: {', '.join(sorted(unknown))}")

    values = {attr: record.get(key) for key, attr in FIELD_MAP.items()}
    for attr in ("reviewer_id", "item_id", "review_text", "summary", "review_hash", "review_time", "category"):
        if not isinstance(values[attr], str):
            raise ReviewError(f"{attr} must be a string")
    overall = values["overall"]
    # 5.0 is accepted as 5; 4.5 is not a star rating
    if isinstance(overall, float) and overall.is_integer():
        values["overall"] = int(overall)
    price = values["price"]
    if price is not None:
        if isinstance(price, bool) or not isinstance(price, (int, float)):
            raise ReviewError(f"price must be a number, got {price!r}")
        values["price"] = float(price)
    return Review(**values)


def parse_reviews(stream: Union[bytes, str, IO]) -> list[Review]:
    """Parse newline-delimited JSON review records, in input order.

    Blank lines are skipped. Any failure raises :class:`ReviewError` carrying
    the 1-based line number.
    """
    if isinstance(stream, bytes):
        lines = stream.decode("utf-8").splitlines()
    elif isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream
    reviews = []
    for lineno, raw in enumerate(lines, 1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ReviewError(f"malformed JSON ({exc.msg})", lineno) from None
        try:
            reviews.append(review_from_record(record))
        except ReviewError as exc:
            raise ReviewError(str(exc), lineno) from None
    return reviews


def read_reviews(path) -> list[Review]:
    with open(path, "rb") as fh:
        return parse_reviews(fh)


def write_reviews(reviews: Iterable[Review], fh: IO[str]) -> None:
    for r in reviews:
        fh.write(json.dumps(r.to_record(), ensure_ascii=False) + "\n")


# --- split -------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Kept in-repo so that split permutations never depend on a library's
    stream-stability policy.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n


def seeded_permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of ``range(n)`` driven by SplitMix64."""
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass(frozen=True)
class Dataset:
    reviews: tuple
    train_indices: tuple
    test_indices: tuple
    split_seed: int

    @property
    def train(self) -> list[Review]:
        return [self.reviews[i] for i in self.train_indices]

    @property
    def test(self) -> list[Review]:
        return [self.reviews[i] for i in self.test_indices]


def split(reviews: Sequence[Review], ratio: float = 0.7, seed: int = 42) -> Dataset:
    n = len(reviews)
    if n < 2:
        raise ValueError(f"need at least 2 reviews to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    perm = seeded_permutation(n, seed)
    n_train = math.floor(ratio * n)
    return Dataset(tuple(reviews), tuple(perm[:n_train]), tuple(perm[n_train:]), seed)


# --- statistics ----------------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    n_reviews: int
    unique_counts: dict
    rating_histogram: dict
    time_range: Optional[tuple]
    category_histogram: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["attribute", "unique_count"])
        for key, count in self.unique_counts.items():
            w.writerow([key, count])
        w.writerow([])
        w.writerow(["rating", "count"])
        for rating, count in self.rating_histogram.items():
            w.writerow([rating, count])
        w.writerow([])
        w.writerow(["category", "count"])
        for genre, count in self.category_histogram.items():
            w.writerow([genre, count])
        w.writerow([])
        w.writerow(["time", "value"])
        lo, hi = self.time_range if self.time_range else ("", "")
        w.writerow(["min", lo])
        w.writerow(["max", hi])
        return buf.getvalue()

    def to_text(self) -> str:
        width = max(len(k) for k in FIELD_MAP)
        lines = [f"{'attribute':<{width}}  unique"]
        lines += [f"{k:<{width}}  {v}" for k, v in self.unique_counts.items()]
        lines.append("")
        lines.append("rating  count")
        lines += [f"{r:<6}  {c}" for r, c in self.rating_histogram.items()]
        lines.append("")
        gwidth = max(len(g) for g in GENRES)
        lines.append(f"{'category':<{gwidth}}  count")
        lines += [f"{g:<{gwidth}}  {c}" for g, c in self.category_histogram.items()]
        if self.time_range:
            lines.append("")
            lines.append(f"unixReviewTime range: {self.time_range[0]} .. {self.time_range[1]}")
        return "\n".join(lines) + "\n"


def compute_stats(reviews: Sequence[Review]) -> CorpusStats:
    unique_counts = {
        key: len({getattr(r, attr) for r in reviews}) for key, attr in FIELD_MAP.items()
    }
    ratings = Counter(r.overall for r in reviews)
    genres = Counter(r.category for r in reviews)
    times = [r.unix_review_time for r in reviews]
    return CorpusStats(
        n_reviews=len(reviews),
        unique_counts=unique_counts,
        rating_histogram={k: ratings[k] for k in sorted(ratings)},
        time_range=(min(times), max(times)) if times else None,
        category_histogram={k: genres[k] for k in sorted(genres)},
    )
