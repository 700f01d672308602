"""Comment-dump ingestion: parse, filter, sample, time-bucket, categorize.

All operations are pure and order-independent so ingestion can be sharded
across any number of workers without changing the accepted set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import BeforeAnchor, MalformedLine
from .hashutil import unit_interval

SECONDS_PER_WEEK = 7 * 24 * 3600

# 2015-01-01T00:00:00Z, start of the study window.
DEFAULT_ANCHOR = 1420070400

_REQUIRED_FIELDS = ("id", "author", "subreddit", "body", "score", "created_utc")


@dataclass(slots=True)
class RawComment:
    id: str
    author: str
    subreddit: str
    body: str
    score: int
    created_utc: int


@dataclass(frozen=True)
class FilterConfig:
    """Survival rules applied to every parsed comment before sampling."""

    min_body_length: int = 10
    excluded_author: str = "[deleted]"
    sample_rate: float = 0.1
    sample_seed: int = 0

    def __post_init__(self):
        if self.min_body_length < 0:
            raise ValueError("min_body_length must be >= 0")
        if not (0 < self.sample_rate <= 1):
            raise ValueError("sample_rate must be in (0, 1]")


class Category(Enum):
    POLITICAL = "political"
    DEFAULT = "default"
    OTHER = "other"


@dataclass(frozen=True)
class SubredditTaxonomy:
    """Case-insensitive subreddit -> category mapping.

    Anything outside the political and default sets is ``Category.OTHER``;
    "apolitical" in the timeline analyses means default plus other.
    """

    political: frozenset[str]
    default: frozenset[str]

    def __post_init__(self):
        overlap = self.political & self.default
        if overlap:
            raise ValueError(f"subreddits in both political and default sets: {sorted(overlap)}")

    @classmethod
    def from_lists(cls, political, default) -> "SubredditTaxonomy":
        return cls(
            political=frozenset(_canon(s) for s in political),
            default=frozenset(_canon(s) for s in default),
        )

    @classmethod
    def from_json_file(cls, path) -> "SubredditTaxonomy":
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
        return cls.from_lists(spec.get("political", []), spec.get("default", []))


def _canon(subreddit: str) -> str:
    return subreddit.strip().lower()


def parse_comment_line(line: str) -> RawComment:
    """Parse one JSON-lines comment record.

    Unknown fields are ignored; the body is kept exactly as decoded, with no
    trimming or re-encoding. Raises :class:`MalformedLine` on anything that
    is not a JSON object carrying the five required fields with the right
    types.
    """
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedLine(f"not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedLine("line is not a JSON object")
    for name in _REQUIRED_FIELDS:
        if name not in obj:
            raise MalformedLine(f"missing field {name!r}")
    cid, author, subreddit, body = obj["id"], obj["author"], obj["subreddit"], obj["body"]
    score, created = obj["score"], obj["created_utc"]
    if not isinstance(cid, str) or not cid:
        raise MalformedLine("id must be a non-empty string")
    for name, value in (("author", author), ("subreddit", subreddit), ("body", body)):
        if not isinstance(value, str):
            raise MalformedLine(f"{name} must be a string")
    # bool is an int subtype in Python; reject it explicitly.
    for name, value in (("score", score), ("created_utc", created)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise MalformedLine(f"{name} must be an integer")
    return RawComment(cid, author, subreddit, body, score, created)


def passes_filter(c: RawComment, cfg: FilterConfig) -> bool:
    """True iff the comment survives the length and deleted-author rules.

    Length counts Unicode scalar values of the raw body, before any
    normalization.
    """
    return len(c.body) >= cfg.min_body_length and c.author != cfg.excluded_author


def sample_decision(comment_id: str, cfg: FilterConfig) -> bool:
    """Deterministic inclusion decision for the random subsample.

    Keyed stable hash of the comment id mapped to [0, 1): the verdict
    depends only on (id, sample_seed), never on read order or worker count.
    """
    return unit_interval(comment_id.encode("utf-8"), cfg.sample_seed) < cfg.sample_rate


def week_of(created_utc: int, anchor: int = DEFAULT_ANCHOR) -> int:
    """7-day bucket ordinal since the anchor instant."""
    if created_utc < anchor:
        raise BeforeAnchor(f"timestamp {created_utc} precedes anchor {anchor}")
    return (created_utc - anchor) // SECONDS_PER_WEEK


def categorize(subreddit: str, tax: SubredditTaxonomy) -> Category:
    name = _canon(subreddit)
    if name in tax.political:
        return Category.POLITICAL
    if name in tax.default:
        return Category.DEFAULT
    return Category.OTHER


@dataclass
class IngestStats:
    """Counters for the ingest funnel, in rule application order."""

    lines_read: int = 0
    malformed: int = 0
    too_short: int = 0
    excluded_author: int = 0
    out_of_window: int = 0
    sampled_out: int = 0
    accepted: int = 0

    def merge(self, other: "IngestStats") -> None:
        for f in (
            "lines_read",
            "malformed",
            "too_short",
            "excluded_author",
            "out_of_window",
            "sampled_out",
            "accepted",
        ):
            setattr(self, f, getattr(self, f) + getattr(other, f))

    def as_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "malformed": self.malformed,
            "too_short": self.too_short,
            "excluded_author": self.excluded_author,
            "out_of_window": self.out_of_window,
            "sampled_out": self.sampled_out,
            "accepted": self.accepted,
        }


@dataclass(frozen=True)
class StudyWindow:
    """Optional inclusive-start, exclusive-end timestamp bounds."""

    start: int | None = None
    end: int | None = None

    def contains(self, ts: int) -> bool:
        if self.start is not None and ts < self.start:
            return False
        if self.end is not None and ts >= self.end:
            return False
        return True


def ingest_lines(lines, cfg: FilterConfig, window: StudyWindow | None = None,
                 stats: IngestStats | None = None):
    """Apply the full ingest funnel to an iterable of raw JSON lines.

    Yields (original_line, RawComment) for accepted comments so callers can
    re-emit input lines byte-for-byte. Malformed lines are counted, never
    fatal: multi-hundred-GB dumps contain occasional corruption.
    """
    window = window or StudyWindow()
    if stats is None:
        stats = IngestStats()
    for line in lines:
        if not line.strip():
            continue
        stats.lines_read += 1
        try:
            comment = parse_comment_line(line)
        except MalformedLine:
            stats.malformed += 1
            continue
        if len(comment.body) < cfg.min_body_length:
            stats.too_short += 1
            continue
        if comment.author == cfg.excluded_author:
            stats.excluded_author += 1
            continue
        if not window.contains(comment.created_utc):
            stats.out_of_window += 1
            continue
        if not sample_decision(comment.id, cfg):
            stats.sampled_out += 1
            continue
        stats.accepted += 1
        yield line, comment
