"""Deterministic synthetic fixtures shared by the unit and acceptance tests.

Two planted word clusters (benign vs nasty pseudo-profanity) give the
embedding a recoverable structure: nasty words co-occur with each other, so
the lexicon mean vector lands near them and the transform separates the
two comment populations.
"""

from __future__ import annotations

import csv
import json

import numpy as np

BENIGN_WORDS = [f"plain{i}" for i in range(30)]
NASTY_WORDS = [f"vile{i}" for i in range(12)]

POLITICAL_SUBS = ["politics", "the_donald", "elections", "worldpolitics"]
DEFAULT_SUBS = ["askreddit", "askscience", "news", "tifu"]
OTHER_SUBS = ["dota2", "knitting", "trains", "aquaria"]

WINDOW_START = 1420070400  # 2015-01-01T00:00:00Z
WINDOW_END = 1483228800    # 2017-01-01T00:00:00Z


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


def benign_sentence(rng) -> str:
    k = int(rng.integers(5, 10))
    return " ".join(rng.choice(BENIGN_WORDS, size=k))


def nasty_sentence(rng) -> str:
    k_nasty = int(rng.integers(2, 5))
    k_benign = int(rng.integers(2, 5))
    words = list(rng.choice(NASTY_WORDS, size=k_nasty))
    words += list(rng.choice(BENIGN_WORDS, size=k_benign))
    rng.shuffle(words)
    return " ".join(words)


def two_cluster_sentences(seed, n=800, nasty_share=0.3) -> list[list[str]]:
    rng = rng_for(seed)
    out = []
    for _ in range(n):
        text = nasty_sentence(rng) if rng.random() < nasty_share else benign_sentence(rng)
        out.append(text.split())
    return out


def make_comments(seed, n=5000, nasty_share=0.25, deleted_share=0.02,
                  short_share=0.02) -> list[dict]:
    """Raw comment dicts in the dump schema; a slice is short or [deleted]
    so the ingest funnel has something to reject."""
    rng = rng_for(seed)
    subs = POLITICAL_SUBS + DEFAULT_SUBS + OTHER_SUBS
    author_pool = [f"user{i}" for i in range(max(40, n // 25))]
    comments = []
    for i in range(n):
        nasty = rng.random() < nasty_share
        body = nasty_sentence(rng) if nasty else benign_sentence(rng)
        author = str(rng.choice(author_pool))
        r = rng.random()
        if r < deleted_share:
            author = "[deleted]"
        elif r < deleted_share + short_share:
            body = "short"
        score = int(rng.integers(-5, 40)) + (5 if nasty else 0)
        comments.append({
            "id": f"c{i:07d}",
            "author": author,
            "subreddit": str(rng.choice(subs)),
            "body": body,
            "score": score,
            "created_utc": int(rng.integers(WINDOW_START, WINDOW_END)),
        })
    return comments


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record))
            fh.write("\n")


def write_labeled_csv(path, seed, n=1200, shares=(0.504, 0.331, 0.165)) -> dict:
    """CrowdFlower-shaped CSV with exact class counts per the shares."""
    rng = rng_for(seed)
    n_no = round(n * shares[0])
    n_o = round(n * shares[1])
    n_oh = n - n_no - n_o
    rows = []
    for cls, count in (("NO", n_no), ("O", n_o), ("OH", n_oh)):
        for _ in range(count):
            text = benign_sentence(rng) if cls == "NO" else nasty_sentence(rng)
            confidence = round(float(rng.uniform(0.34, 1.0)), 4)
            rows.append((text, cls, confidence))
    rng.shuffle(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tweet_text", "does_this_tweet_contain_hate_speech", "confidence"])
        writer.writerows(rows)
    return {"NO": n_no, "O": n_o, "OH": n_oh}


def write_lexicon(path, words, comment="# synthetic lexicon") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(comment + "\n")
        for word in words:
            fh.write(word + "\n")
