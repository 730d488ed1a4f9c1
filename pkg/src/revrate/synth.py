"""Deterministic synthetic review corpus.

Ratings are a noisy rounding of a latent score built from a per-review
sentiment level (planted as sentiment words in the text), a per-reviewer
bias, a per-genre offset and a small per-item quality term.

Regenerate the committed fixture with::

    python -m revrate.synth 2000 42 > tests/fixtures/synthetic_2000.jsonl
"""

import random
import sys
import time

from .corpus import GENRES, Review, write_reviews

SENTIMENT_WORDS = {
    -2: ["terrible", "awful", "worst", "garbage", "horrible", "unlistenable", "waste"],
    -1: ["boring", "weak", "disappointing", "bland", "forgettable", "dull", "mediocre"],
    0: ["okay", "average", "decent", "fine", "passable", "ordinary", "alright"],
    1: ["good", "nice", "enjoyable", "solid", "pleasant", "catchy", "fun"],
    2: ["amazing", "brilliant", "masterpiece", "stunning", "excellent", "perfect", "beautiful"],
}
NEUTRAL_WORDS = [
    "song", "track", "album", "music", "guitar", "vocals", "melody", "beat", "lyrics",
    "production", "listen", "bought", "record", "band", "singer", "chorus", "drums", "bass",
    "sound", "release", "tune", "piano", "studio", "live", "version", "artist", "style",
    "rhythm", "voice", "mix", "remaster", "disc", "copy", "download", "playlist", "radio",
]
FILLER_STOPWORDS = ["the", "a", "this", "is", "it", "and", "of", "to", "was", "with"]
GENRE_OFFSET = {
    "Pop": -0.6, "Alternative Rock": 0.0, "Jazz": 0.8, "Classical": 1.1, "Dance & Electronic": -1.0,
}
SUMMARY_TEMPLATES = ["{w} {n}", "{w}", "{n} {w} {w2}", "{w} and {w2}"]
T0 = 1_262_304_000   # 2010-01-01
T1 = 1_404_172_800   # 2014-07-01


def _words(rng: random.Random, level: int, n_content: int) -> list[str]:
    out = []
    for _ in range(n_content):
        u = rng.random()
        if u < 0.35:
            # sentiment word, occasionally from an adjacent level
            lvl = level
            if rng.random() < 0.15:
                lvl = max(-2, min(2, level + rng.choice((-1, 1))))
            out.append(rng.choice(SENTIMENT_WORDS[lvl]))
        elif u < 0.45:
            out.append(rng.choice(FILLER_STOPWORDS))
        else:
            out.append(rng.choice(NEUTRAL_WORDS))
    return out


def generate_reviews(n: int, seed: int = 42, n_reviewers: int = None, n_items: int = None) -> list[Review]:
    rng = random.Random(seed)
    n_reviewers = n_reviewers or max(2, n // 40)
    n_items = n_items or max(2, n // 15)
    reviewer_bias = [rng.uniform(-1.2, 1.2) for _ in range(n_reviewers)]
    item_quality = [rng.gauss(0.0, 0.25) for _ in range(n_items)]
    item_genre = [rng.choice(GENRES) for _ in range(n_items)]
    item_price = [round(rng.uniform(0.69, 1.29), 2) for _ in range(n_items)]
    reviews = []
    for k in range(n):
        r = rng.randrange(n_reviewers)
        it = rng.randrange(n_items)
        level = rng.choice((-2, -1, 0, 1, 1, 2, 2))
        genre = item_genre[it]
        ts = rng.randrange(T0, T1)
        drift = 0.2 * (ts - T0) / (T1 - T0)
        latent = (3.0 + 0.8 * level + reviewer_bias[r] + GENRE_OFFSET[genre]
                  + item_quality[it] + drift + rng.gauss(0.0, 0.35))
        rating = max(1, min(5, int(round(latent))))
        # long enough that the 50-token desk window is always full
        text = " ".join(_words(rng, level, rng.randint(60, 90)))
        text = text[0].upper() + text[1:] + "."
        w, w2 = rng.choice(SENTIMENT_WORDS[level]), rng.choice(SENTIMENT_WORDS[level])
        summary = rng.choice(SUMMARY_TEMPLATES).format(w=w, w2=w2, n=rng.choice(NEUTRAL_WORDS)).capitalize()
        reviews.append(Review(
            reviewer_id=f"R{r:04d}",
            item_id=f"I{it:05d}",
            review_text=text,
            summary=summary,
            overall=rating,
            price=item_price[it] if rng.random() > 0.1 else None,
            review_hash=f"{rng.getrandbits(32):08x}",
            unix_review_time=ts,
            review_time=time.strftime("%m %d, %Y", time.gmtime(ts)),
            category=genre,
        ))
    return reviews


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    n = int(argv[0]) if argv else 2000
    seed = int(argv[1]) if len(argv) > 1 else 42
    write_reviews(generate_reviews(n, seed), sys.stdout)


if __name__ == "__main__":
    main()
