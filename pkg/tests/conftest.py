import json
from pathlib import Path

import pytest

from revrate.corpus import Review

FIXTURES = Path(__file__).parent / "fixtures"
SYNTHETIC = FIXTURES / "synthetic_2000.jsonl"


def make_review(**overrides) -> Review:
    fields = dict(
        reviewer_id="A1", item_id="X1", review_text="Great album", summary="Loved it",
        overall=5, price=0.99, review_hash="h0", unix_review_time=1_300_000_000,
        review_time="03 13, 2011", category="Jazz",
    )
    fields.update(overrides)
    return Review(**fields)


def record(**overrides) -> dict:
    rec = {
        "reviewerID": "A1", "itemID": "X1", "reviewText": "Great album", "summary": "Loved it",
        "overall": 5, "price": 0.99, "reviewHash": "h0", "unixReviewTime": 1_300_000_000,
        "reviewTime": "03 13, 2011", "category": "Jazz",
    }
    rec.update(overrides)
    return rec


def jsonl(*records) -> bytes:
    return "".join(json.dumps(r) + "\n" for r in records).encode("utf-8")


@pytest.fixture
def small_reviews():
    genres = ["Pop", "Jazz", "Classical", "Alternative Rock", "Dance & Electronic"]
    texts = ["good good song", "bad track", "great album", "boring music", "good beat"]
    return [
        make_review(reviewer_id=f"A{i % 3}", item_id=f"X{i % 4}", review_text=texts[i % 5],
                    summary="", overall=1 + i % 5, unix_review_time=1000 + 10 * i,
                    category=genres[i % 5], review_hash=f"h{i}")
        for i in range(10)
    ]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(results, key=lambda s: int(s.split("AC")[1].split()[0])):
            terminalreporter.write_line(line)
