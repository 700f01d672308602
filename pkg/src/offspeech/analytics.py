"""Measurement suite over the classified comment stream.

Every aggregate is built from integer counters that merge commutatively and
associatively, so partial aggregates from any sharding of the input reduce
to identical results; ratios and means are derived only at finalize time.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum

from .corpus import Category
from .errors import UnknownDestination


@dataclass(slots=True)
class ClassifiedComment:
    id: str
    author: str
    subreddit: str
    category: Category
    week: int
    score: int
    offense_score: float
    offensive: bool


class VolumeClass(Enum):
    THROWAWAY = "throwaway"  # < 5 total comments
    MID = "mid"              # 5..15
    HIGH_VOLUME = "high"     # > 15


TROLL_MIN_COMMENTS = 15   # troll needs strictly more than this
TROLL_MIN_FRACTION = 0.75  # and strictly more than this offensive share


def volume_class(total: int) -> VolumeClass:
    if total < 5:
        return VolumeClass.THROWAWAY
    if total <= 15:
        return VolumeClass.MID
    return VolumeClass.HIGH_VOLUME


@dataclass(slots=True)
class AuthorProfile:
    author: str
    total_comments: int
    offensive_comments: int

    @property
    def offensive_fraction(self) -> float:
        return self.offensive_comments / self.total_comments

    @property
    def volume(self) -> VolumeClass:
        return volume_class(self.total_comments)

    @property
    def troll(self) -> bool:
        return (
            self.total_comments > TROLL_MIN_COMMENTS
            and self.offensive_fraction > TROLL_MIN_FRACTION
        )


# ---------------------------------------------------------------------------
# mergeable aggregates

class TimelineAggregate:
    """Per-week offensive/total counts split political vs apolitical."""

    def __init__(self):
        self.weeks = {}

    def update(self, c: ClassifiedComment) -> None:
        cell = self.weeks.get(c.week)
        if cell is None:
            cell = self.weeks[c.week] = [0, 0, 0, 0]
        if c.category is Category.POLITICAL:
            cell[1] += 1
            if c.offensive:
                cell[0] += 1
        else:
            cell[3] += 1
            if c.offensive:
                cell[2] += 1

    def merge(self, other: "TimelineAggregate") -> None:
        for week, cell in other.weeks.items():
            mine = self.weeks.get(week)
            if mine is None:
                self.weeks[week] = list(cell)
            else:
                for i in range(4):
                    mine[i] += cell[i]


class ScoreAggregate:
    """Integer score sums for offensive comments per week and globally."""

    def __init__(self):
        self.weeks = {}
        # [off_sum, off_n, nonoff_sum, nonoff_n, pol_off_sum, pol_off_n,
        #  apol_off_sum, apol_off_n]
        self.totals = [0] * 8

    def update(self, c: ClassifiedComment) -> None:
        t = self.totals
        if c.offensive:
            t[0] += c.score
            t[1] += 1
            cell = self.weeks.get(c.week)
            if cell is None:
                cell = self.weeks[c.week] = [0, 0, 0, 0]
            if c.category is Category.POLITICAL:
                t[4] += c.score
                t[5] += 1
                cell[0] += c.score
                cell[1] += 1
            else:
                t[6] += c.score
                t[7] += 1
                cell[2] += c.score
                cell[3] += 1
        else:
            t[2] += c.score
            t[3] += 1

    def merge(self, other: "ScoreAggregate") -> None:
        for week, cell in other.weeks.items():
            mine = self.weeks.get(week)
            if mine is None:
                self.weeks[week] = list(cell)
            else:
                for i in range(4):
                    mine[i] += cell[i]
        for i in range(8):
            self.totals[i] += other.totals[i]


class AuthorAggregate:
    def __init__(self):
        self.authors = {}

    def update(self, c: ClassifiedComment) -> None:
        cell = self.authors.get(c.author)
        if cell is None:
            cell = self.authors[c.author] = [0, 0]
        cell[0] += 1
        if c.offensive:
            cell[1] += 1

    def merge(self, other: "AuthorAggregate") -> None:
        for author, cell in other.authors.items():
            mine = self.authors.get(author)
            if mine is None:
                self.authors[author] = list(cell)
            else:
                mine[0] += cell[0]
                mine[1] += cell[1]


class SubredditAggregate:
    def __init__(self):
        self.subs = {}

    def update(self, c: ClassifiedComment) -> None:
        cell = self.subs.get(c.subreddit)
        if cell is None:
            cell = self.subs[c.subreddit] = [0, 0, c.category]
        cell[0] += 1
        if c.offensive:
            cell[1] += 1

    def merge(self, other: "SubredditAggregate") -> None:
        for sub, cell in other.subs.items():
            mine = self.subs.get(sub)
            if mine is None:
                self.subs[sub] = list(cell)
            else:
                mine[0] += cell[0]
                mine[1] += cell[1]


class FlowAggregate:
    """Per author, earliest offensive-comment timestamp in each subreddit.

    Week granularity is too coarse for precedence, so flow works on raw
    created_utc values supplied alongside the comment.
    """

    def __init__(self):
        self.first_offense = {}

    def update_with_ts(self, c: ClassifiedComment, created_utc: int) -> None:
        if not c.offensive:
            return
        per_author = self.first_offense.get(c.author)
        if per_author is None:
            per_author = self.first_offense[c.author] = {}
        prev = per_author.get(c.subreddit)
        if prev is None or created_utc < prev:
            per_author[c.subreddit] = created_utc

    def merge(self, other: "FlowAggregate") -> None:
        for author, subs in other.first_offense.items():
            mine = self.first_offense.get(author)
            if mine is None:
                self.first_offense[author] = dict(subs)
            else:
                for sub, ts in subs.items():
                    prev = mine.get(sub)
                    if prev is None or ts < prev:
                        mine[sub] = ts


# ---------------------------------------------------------------------------
# finalized reports

@dataclass
class TimelineRow:
    week: int
    political_offensive: int
    political_total: int
    apolitical_offensive: int
    apolitical_total: int

    @property
    def political_fraction(self) -> float:
        return self.political_offensive / self.political_total if self.political_total else 0.0

    @property
    def apolitical_fraction(self) -> float:
        return self.apolitical_offensive / self.apolitical_total if self.apolitical_total else 0.0


def _relative_excess(pol_off, pol_tot, apol_off, apol_tot):
    """political fraction over apolitical fraction, minus one; None when a
    denominator is empty. This is the 'X% more likely' statistic."""
    if pol_tot == 0 or apol_tot == 0 or apol_off == 0:
        return None
    return (pol_off / pol_tot) / (apol_off / apol_tot) - 1.0


@dataclass
class TimelineReport:
    rows: list
    political_offensive: int
    political_total: int
    apolitical_offensive: int
    apolitical_total: int
    cutover_week: int | None
    relative_excess_overall: float | None
    relative_excess_pre: float | None
    relative_excess_post: float | None

    @property
    def political_fraction(self) -> float:
        return self.political_offensive / self.political_total if self.political_total else 0.0

    @property
    def apolitical_fraction(self) -> float:
        return self.apolitical_offensive / self.apolitical_total if self.apolitical_total else 0.0


def finalize_timeline(agg: TimelineAggregate, cutover_week: int | None = None) -> TimelineReport:
    """Rows for every week from 0 to the last observed (empty weeks emitted
    with zero counts) plus overall and pre/post-cutover comparisons."""
    max_week = max(agg.weeks) if agg.weeks else -1
    rows = []
    for week in range(max_week + 1):
        cell = agg.weeks.get(week, (0, 0, 0, 0))
        rows.append(TimelineRow(week, cell[0], cell[1], cell[2], cell[3]))
    totals = [0, 0, 0, 0]
    pre = [0, 0, 0, 0]
    post = [0, 0, 0, 0]
    for row in rows:
        cell = (row.political_offensive, row.political_total,
                row.apolitical_offensive, row.apolitical_total)
        for i in range(4):
            totals[i] += cell[i]
        if cutover_week is not None:
            side = pre if row.week < cutover_week else post
            for i in range(4):
                side[i] += cell[i]
    return TimelineReport(
        rows=rows,
        political_offensive=totals[0],
        political_total=totals[1],
        apolitical_offensive=totals[2],
        apolitical_total=totals[3],
        cutover_week=cutover_week,
        relative_excess_overall=_relative_excess(*totals),
        relative_excess_pre=_relative_excess(*pre) if cutover_week is not None else None,
        relative_excess_post=_relative_excess(*post) if cutover_week is not None else None,
    )


@dataclass
class ScoreRow:
    week: int
    political_offensive_count: int
    political_offensive_score_sum: int
    apolitical_offensive_count: int
    apolitical_offensive_score_sum: int

    @property
    def political_mean(self) -> float | None:
        if self.political_offensive_count == 0:
            return None
        return self.political_offensive_score_sum / self.political_offensive_count

    @property
    def apolitical_mean(self) -> float | None:
        if self.apolitical_offensive_count == 0:
            return None
        return self.apolitical_offensive_score_sum / self.apolitical_offensive_count


@dataclass
class ScoreReport:
    rows: list
    offensive_mean: float | None
    non_offensive_mean: float | None
    political_offensive_mean: float | None
    apolitical_offensive_mean: float | None


def _mean(total, count):
    return total / count if count else None


def finalize_scores(agg: ScoreAggregate, max_week: int | None = None) -> ScoreReport:
    top = max(agg.weeks) if agg.weeks else -1
    if max_week is not None:
        top = max(top, max_week)
    rows = []
    for week in range(top + 1):
        cell = agg.weeks.get(week, (0, 0, 0, 0))
        rows.append(ScoreRow(week, cell[1], cell[0], cell[3], cell[2]))
    t = agg.totals
    return ScoreReport(
        rows=rows,
        offensive_mean=_mean(t[0], t[1]),
        non_offensive_mean=_mean(t[2], t[3]),
        political_offensive_mean=_mean(t[4], t[5]),
        apolitical_offensive_mean=_mean(t[6], t[7]),
    )


@dataclass
class AuthorReport:
    # None when profile rows were streamed to disk by the spill mode
    profiles: list | None
    cdf: list  # (offensive_fraction, cumulative_authors, cumulative_share)
    high_fraction_count: int
    high_fraction_throwaway_share: float | None
    high_fraction_mid_share: float | None
    high_fraction_troll_share: float | None
    quartile_breakdown: dict


_QUARTILE_NAMES = ("q1_0_25", "q2_25_50", "q3_50_75", "q4_75_100")


class _AuthorSummaryAcc:
    """Additive summary over (total, offensive) author pairs; order-free, so
    the in-memory and spilled paths produce identical reports."""

    def __init__(self):
        self.fraction_hist = {}
        self.high = 0
        self.high_throwaway = 0
        self.high_mid = 0
        self.high_troll = 0
        self.quartiles = {}
        for name in _QUARTILE_NAMES:
            self.quartiles[name] = {v.value: 0 for v in VolumeClass}
            self.quartiles[name]["troll"] = 0

    def add(self, total: int, offensive: int) -> None:
        p = AuthorProfile("", total, offensive)
        f = p.offensive_fraction
        self.fraction_hist[f] = self.fraction_hist.get(f, 0) + 1
        if f > TROLL_MIN_FRACTION:
            self.high += 1
            if p.volume is VolumeClass.THROWAWAY:
                self.high_throwaway += 1
            elif p.volume is VolumeClass.MID:
                self.high_mid += 1
            if p.troll:
                self.high_troll += 1
        if f <= 0.25:
            bucket = _QUARTILE_NAMES[0]
        elif f <= 0.5:
            bucket = _QUARTILE_NAMES[1]
        elif f <= 0.75:
            bucket = _QUARTILE_NAMES[2]
        else:
            bucket = _QUARTILE_NAMES[3]
        self.quartiles[bucket][p.volume.value] += 1
        if p.troll:
            self.quartiles[bucket]["troll"] += 1

    def report(self, profiles) -> AuthorReport:
        n = sum(self.fraction_hist.values())
        cdf = []
        cum = 0
        for fraction in sorted(self.fraction_hist):
            cum += self.fraction_hist[fraction]
            cdf.append((fraction, cum, cum / n if n else 0.0))
        hn = self.high
        return AuthorReport(
            profiles=profiles,
            cdf=cdf,
            high_fraction_count=hn,
            high_fraction_throwaway_share=self.high_throwaway / hn if hn else None,
            high_fraction_mid_share=self.high_mid / hn if hn else None,
            high_fraction_troll_share=self.high_troll / hn if hn else None,
            quartile_breakdown=self.quartiles,
        )


def finalize_authors(agg: AuthorAggregate) -> AuthorReport:
    """Profiles ordered by author name, the offensive-fraction CDF, the
    class shares among authors with > 75% offensive comments, and the
    per-quartile class breakdown."""
    profiles = [
        AuthorProfile(author, cell[0], cell[1])
        for author, cell in sorted(agg.authors.items())
    ]
    acc = _AuthorSummaryAcc()
    for p in profiles:
        acc.add(p.total_comments, p.offensive_comments)
    return acc.report(profiles)


@dataclass
class SubredditRow:
    subreddit: str
    category: Category
    comment_count: int
    offensive_count: int

    @property
    def offensive_fraction(self) -> float:
        return self.offensive_count / self.comment_count


@dataclass
class SubredditReport:
    rows: list  # only subreddits with comment_count > min_comments
    min_comments: int
    category_cdf: dict  # category value -> [(fraction, cum_subs, cum_share)]
    most_offensive: dict  # category value -> [(subreddit, fraction)]
    least_offensive: dict
    share_above_threshold: float | None
    comment_share_above_threshold: float | None
    offense_threshold: float


def finalize_subreddits(agg: SubredditAggregate, min_comments: int = 1000,
                        offense_threshold: float = 0.10, top_k: int = 3) -> SubredditReport:
    """Per-subreddit fractions over communities with strictly more than
    ``min_comments`` comments, their per-category distribution, the
    most/least offensive tables, and the share of communities (and of their
    comments) above the offense threshold."""
    rows = [
        SubredditRow(sub, cell[2], cell[0], cell[1])
        for sub, cell in sorted(agg.subs.items())
        if cell[0] > min_comments
    ]
    category_cdf = {}
    most = {}
    least = {}
    for cat in Category:
        in_cat = [r for r in rows if r.category is cat]
        fractions = {}
        for r in in_cat:
            fractions[r.offensive_fraction] = fractions.get(r.offensive_fraction, 0) + 1
        cdf = []
        cum = 0
        for fraction in sorted(fractions):
            cum += fractions[fraction]
            cdf.append((fraction, cum, cum / len(in_cat)))
        category_cdf[cat.value] = cdf
        ranked = sorted(in_cat, key=lambda r: (-r.offensive_fraction, r.subreddit))
        most[cat.value] = [(r.subreddit, r.offensive_fraction) for r in ranked[:top_k]]
        least[cat.value] = [(r.subreddit, r.offensive_fraction) for r in ranked[::-1][:top_k]]
    above = [r for r in rows if r.offensive_fraction > offense_threshold]
    total_comments = sum(r.comment_count for r in rows)
    return SubredditReport(
        rows=rows,
        min_comments=min_comments,
        category_cdf=category_cdf,
        most_offensive=most,
        least_offensive=least,
        share_above_threshold=len(above) / len(rows) if rows else None,
        comment_share_above_threshold=(
            sum(r.comment_count for r in above) / total_comments if total_comments else None
        ),
        offense_threshold=offense_threshold,
    )


@dataclass
class FlowEdge:
    source: str
    destination: str
    author_count: int


def _flow_counts(first_offense: dict, destination: str) -> tuple[dict, bool]:
    counts = {}
    found = False
    for subs in first_offense.values():
        t0 = subs.get(destination)
        if t0 is None:
            continue
        found = True
        for sub, ts in subs.items():
            if sub != destination and ts < t0:
                counts[sub] = counts.get(sub, 0) + 1
    return counts, found


def _flow_edges(counts: dict, destination: str, min_flow: int) -> list["FlowEdge"]:
    edges = [
        FlowEdge(sub, destination, count)
        for sub, count in counts.items()
        if count >= min_flow
    ]
    edges.sort(key=lambda e: (-e.author_count, e.source))
    return edges


def finalize_flow(agg: FlowAggregate, destination: str, min_flow: int = 200) -> list["FlowEdge"]:
    """Authors whose offensive activity in a source strictly precedes their
    first offensive comment in the destination; one count per author per
    source. Edges below ``min_flow`` authors are dropped."""
    destination = destination.strip().lower()
    counts, found = _flow_counts(agg.first_offense, destination)
    if not found:
        raise UnknownDestination(f"no offensive comments observed in {destination!r}")
    return _flow_edges(counts, destination, min_flow)


# ---------------------------------------------------------------------------
# one-pass composite

class CorpusAnalytics:
    """All aggregates over one pass; shards merge into identical state."""

    def __init__(self):
        self.timeline = TimelineAggregate()
        self.scores = ScoreAggregate()
        self.authors = AuthorAggregate()
        self.subreddits = SubredditAggregate()
        self.flow = FlowAggregate()
        self.comment_count = 0

    def update(self, c: ClassifiedComment, created_utc: int) -> None:
        self.comment_count += 1
        self.timeline.update(c)
        self.scores.update(c)
        self.authors.update(c)
        self.subreddits.update(c)
        self.flow.update_with_ts(c, created_utc)

    def merge(self, other: "CorpusAnalytics") -> None:
        self.comment_count += other.comment_count
        self.timeline.merge(other.timeline)
        self.scores.merge(other.scores)
        self.authors.merge(other.authors)
        self.subreddits.merge(other.subreddits)
        self.flow.merge(other.flow)


def aggregate_sharded(classified_with_ts, workers: int = 1) -> CorpusAnalytics:
    """Round-robin the stream over ``workers`` partial aggregates, then
    merge. Results are invariant to the worker count by construction."""
    shards = [CorpusAnalytics() for _ in range(max(1, workers))]
    for i, (c, ts) in enumerate(classified_with_ts):
        shards[i % len(shards)].update(c, ts)
    root = shards[0]
    for other in shards[1:]:
        root.merge(other)
    return root


# ---------------------------------------------------------------------------
# external-sort spill mode for per-author state
#
# Author profiling and flow need global per-author evidence; when the author
# universe exceeds memory, phase 1 keeps only the small week/subreddit
# aggregates resident and hashes per-author evidence into bucket files.
# Phase 2 processes one bucket at a time (authors never span buckets) and
# merges the per-bucket sorted profile runs into the final CSV with heapq.

@dataclass
class SpilledAggregates:
    timeline: TimelineAggregate
    scores: ScoreAggregate
    subreddits: SubredditAggregate
    comment_count: int
    bucket_paths: list


def spill_aggregate(classified_with_ts, spill_dir, buckets: int = 16) -> SpilledAggregates:
    """Phase 1: bounded-state aggregates in memory, author evidence on disk."""
    os.makedirs(spill_dir, exist_ok=True)
    timeline = TimelineAggregate()
    scores = ScoreAggregate()
    subreddits = SubredditAggregate()
    count = 0
    paths = [os.path.join(spill_dir, f"authors-{b:03d}.jsonl") for b in range(buckets)]
    files = [open(p, "w", encoding="utf-8") for p in paths]
    try:
        for c, ts in classified_with_ts:
            count += 1
            timeline.update(c)
            scores.update(c)
            subreddits.update(c)
            bucket = int.from_bytes(
                hashlib.blake2b(c.author.encode("utf-8"), digest_size=4).digest(),
                "little") % buckets
            files[bucket].write(json.dumps(
                [c.author, c.subreddit, 1 if c.offensive else 0, ts]))
            files[bucket].write("\n")
    finally:
        for fh in files:
            fh.close()
    return SpilledAggregates(timeline, scores, subreddits, count, paths)


def _scan_bucket(path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            yield json.loads(line)


def finalize_authors_spilled(bucket_paths, summary_csv_path) -> AuthorReport:
    """Phase 2: per-bucket profile runs merged into author_summary.csv in
    global author order; summary statistics accumulate additively. The
    returned report has ``profiles=None`` since rows went straight to disk."""
    import heapq

    acc = _AuthorSummaryAcc()
    run_paths = []
    for path in bucket_paths:
        authors = {}
        for author, _sub, offensive, _ts in _scan_bucket(path):
            cell = authors.get(author)
            if cell is None:
                cell = authors[author] = [0, 0]
            cell[0] += 1
            cell[1] += offensive
        run_path = f"{path}.run"
        run_paths.append(run_path)
        with open(run_path, "w", encoding="utf-8") as fh:
            for author, (total, offensive) in sorted(authors.items()):
                acc.add(total, offensive)
                fh.write(json.dumps([author, total, offensive]))
                fh.write("\n")

    def run_rows(path):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                yield json.loads(line)

    tmp = f"{summary_csv_path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AUTHOR_SUMMARY_HEADER)
        merged = heapq.merge(*(run_rows(p) for p in run_paths), key=lambda r: r[0])
        for author, total, offensive in merged:
            writer.writerow(author_summary_row(author, total, offensive))
    os.replace(tmp, summary_csv_path)
    for p in run_paths:
        os.unlink(p)
    return acc.report(None)


def finalize_flow_spilled(bucket_paths, destination: str, min_flow: int = 200) -> list["FlowEdge"]:
    destination = destination.strip().lower()
    counts = {}
    found = False
    for path in bucket_paths:
        agg = FlowAggregate()
        for author, sub, offensive, ts in _scan_bucket(path):
            if offensive:
                per_author = agg.first_offense.setdefault(author, {})
                prev = per_author.get(sub)
                if prev is None or ts < prev:
                    per_author[sub] = ts
        bucket_counts, bucket_found = _flow_counts(agg.first_offense, destination)
        found = found or bucket_found
        for sub, count in bucket_counts.items():
            counts[sub] = counts.get(sub, 0) + count
    if not found:
        raise UnknownDestination(f"no offensive comments observed in {destination!r}")
    return _flow_edges(counts, destination, min_flow)


# ---------------------------------------------------------------------------
# report emission

TIMELINE_HEADER = [
    "week", "political_offensive", "political_total", "political_fraction",
    "apolitical_offensive", "apolitical_total", "apolitical_fraction",
]
SCORES_HEADER = [
    "week", "political_offensive_count", "political_offensive_mean_score",
    "apolitical_offensive_count", "apolitical_offensive_mean_score",
]
AUTHORS_CDF_HEADER = ["offensive_fraction", "cumulative_authors", "cumulative_share"]
AUTHOR_SUMMARY_HEADER = [
    "author", "total_comments", "offensive_comments", "offensive_fraction",
    "volume_class", "troll",
]
SUBREDDITS_HEADER = [
    "subreddit", "category", "comment_count", "offensive_count", "offensive_fraction",
]
FLOW_HEADER = ["source", "destination", "author_count"]


def _write_csv(path, header, rows):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def author_summary_row(author: str, total: int, offensive: int) -> tuple:
    """One author_summary.csv row; shared by the in-memory and spill paths
    so both emit byte-identical files."""
    p = AuthorProfile(author, total, offensive)
    return (author, total, offensive, repr(p.offensive_fraction),
            p.volume.value, int(p.troll))


def emit_report(
    out_dir,
    timeline: TimelineReport,
    scores: ScoreReport,
    authors: AuthorReport,
    subreddits: SubredditReport,
    flow_edges: list,
    manifest: dict,
) -> dict:
    """Write the six CSV tables plus manifest.json; returns path -> file.

    Outputs carry no timestamps: re-running on identical inputs yields
    byte-identical files.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    def out(name):
        paths[name] = os.path.join(out_dir, name)
        return paths[name]

    _write_csv(
        out("timeline.csv"),
        TIMELINE_HEADER,
        [
            (r.week, r.political_offensive, r.political_total, repr(r.political_fraction),
             r.apolitical_offensive, r.apolitical_total, repr(r.apolitical_fraction))
            for r in timeline.rows
        ],
    )
    _write_csv(
        out("scores.csv"),
        SCORES_HEADER,
        [
            (r.week, r.political_offensive_count,
             "" if r.political_mean is None else repr(r.political_mean),
             r.apolitical_offensive_count,
             "" if r.apolitical_mean is None else repr(r.apolitical_mean))
            for r in scores.rows
        ],
    )
    _write_csv(
        out("authors_cdf.csv"),
        AUTHORS_CDF_HEADER,
        [(repr(f), c, repr(s)) for f, c, s in authors.cdf],
    )
    if authors.profiles is None:
        # spill mode streamed author_summary.csv to disk already
        out("author_summary.csv")
    else:
        _write_csv(
            out("author_summary.csv"),
            AUTHOR_SUMMARY_HEADER,
            [author_summary_row(p.author, p.total_comments, p.offensive_comments)
             for p in authors.profiles],
        )
    _write_csv(
        out("subreddits.csv"),
        SUBREDDITS_HEADER,
        [
            (r.subreddit, r.category.value, r.comment_count, r.offensive_count,
             repr(r.offensive_fraction))
            for r in subreddits.rows
        ],
    )
    _write_csv(
        out("flow.csv"),
        FLOW_HEADER,
        [(e.source, e.destination, e.author_count) for e in flow_edges],
    )

    manifest = dict(manifest)
    manifest["derived_stats"] = derived_stats(timeline, scores, authors, subreddits)
    path = out("manifest.json")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return paths


def derived_stats(timeline: TimelineReport, scores: ScoreReport,
                  authors: AuthorReport, subreddits: SubredditReport) -> dict:
    """Scalar summary statistics. 'relative_excess' values are the ratio of
    the political offensive fraction to the apolitical one, minus one."""
    return {
        "political_offensive_fraction": timeline.political_fraction,
        "apolitical_offensive_fraction": timeline.apolitical_fraction,
        "relative_excess_overall": timeline.relative_excess_overall,
        "relative_excess_pre_cutover": timeline.relative_excess_pre,
        "relative_excess_post_cutover": timeline.relative_excess_post,
        "cutover_week": timeline.cutover_week,
        "offensive_mean_score": scores.offensive_mean,
        "non_offensive_mean_score": scores.non_offensive_mean,
        "political_offensive_mean_score": scores.political_offensive_mean,
        "apolitical_offensive_mean_score": scores.apolitical_offensive_mean,
        "authors_over_75pct_offensive": authors.high_fraction_count,
        "authors_over_75pct_throwaway_share": authors.high_fraction_throwaway_share,
        "authors_over_75pct_mid_share": authors.high_fraction_mid_share,
        "authors_over_75pct_troll_share": authors.high_fraction_troll_share,
        "author_quartile_breakdown": authors.quartile_breakdown,
        "subreddit_share_above_offense_threshold": subreddits.share_above_threshold,
        "comment_share_above_offense_threshold": subreddits.comment_share_above_threshold,
        "subreddit_offense_threshold": subreddits.offense_threshold,
        "most_offensive_subreddits": subreddits.most_offensive,
        "least_offensive_subreddits": subreddits.least_offensive,
    }
