"""File-level classification: comment dump in, scored/labeled rows out.

The input file is split into newline-aligned byte ranges so any worker
count produces the same output bytes; workers only ever see whole lines.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
import os
import shutil
from dataclasses import dataclass

import numpy as np

from .analytics import ClassifiedComment
from .classifier import ForestModel, Label
from .corpus import SubredditTaxonomy, categorize, parse_comment_line, week_of
from .errors import MalformedLine, ProvenanceMismatch
from .hatemodel import HateVector, Scorer
from .textnorm import NormalizerConfig

SCORE_COLUMNS = ["id", "subreddit", "author", "score", "created_utc", "offense_score"]
CLASSIFIED_COLUMNS = SCORE_COLUMNS + ["label"]

_LABEL_NAMES = {True: "Offensive", False: "NotOffensive"}
_LABEL_VALUES = {"Offensive": True, "NotOffensive": False}


@dataclass
class ClassifyStats:
    lines_read: int = 0
    malformed: int = 0
    written: int = 0

    def merge(self, other: "ClassifyStats") -> None:
        self.lines_read += other.lines_read
        self.malformed += other.malformed
        self.written += other.written

    def as_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "malformed": self.malformed,
            "written": self.written,
        }


def check_forest_provenance(forest: ForestModel, embedding_hash: str,
                            lexicon_hash: str | None = None) -> None:
    """Forests trained through the CLI record the feature provenance; when
    present it must match the artifacts used at classification time."""
    feat = forest.metadata.get("feature", {}) if forest.metadata else {}
    want_emb = feat.get("embedding_hash")
    if want_emb is not None and want_emb != embedding_hash:
        raise ProvenanceMismatch(
            f"forest was trained on embedding {want_emb}, got {embedding_hash}"
        )
    want_lex = feat.get("lexicon_hash")
    if lexicon_hash is not None and want_lex is not None and want_lex != lexicon_hash:
        raise ProvenanceMismatch(
            f"forest was trained on lexicon {want_lex}, got {lexicon_hash}"
        )


def _byte_ranges(path, n: int) -> list[tuple[int, int]]:
    """Split [0, filesize) into up to n newline-aligned ranges."""
    size = os.path.getsize(path)
    if size == 0:
        return []
    if n <= 1:
        return [(0, size)]
    ranges = []
    prev = 0
    with open(path, "rb") as fh:
        for i in range(1, n):
            cut = size * i // n
            if cut <= prev:
                continue
            fh.seek(cut)
            fh.readline()
            cut = min(fh.tell(), size)
            if cut > prev:
                ranges.append((prev, cut))
                prev = cut
    if prev < size:
        ranges.append((prev, size))
    return ranges


def _classify_range(input_path, start, end, scorer, forest, fmt, out_fh,
                    batch_size: int = 8192) -> ClassifyStats:
    stats = ClassifyStats()
    pending = []
    scores = []
    writer = csv.writer(out_fh, lineterminator="\n") if fmt == "csv" else None

    def flush():
        if not pending:
            return
        if forest is not None:
            labels, _ = forest.predict_batch(np.asarray(scores, dtype=np.float64))
        else:
            labels = None
        for i, fields in enumerate(pending):
            if labels is not None:
                fields = fields + (_LABEL_NAMES[bool(labels[i])],)
            if writer is not None:
                writer.writerow(fields)
            else:
                cols = CLASSIFIED_COLUMNS if labels is not None else SCORE_COLUMNS
                out_fh.write(json.dumps(dict(zip(cols, fields))))
                out_fh.write("\n")
            stats.written += 1
        pending.clear()
        scores.clear()

    with open(input_path, "rb") as fh:
        fh.seek(start)
        pos = start
        while pos < end:
            raw = fh.readline()
            if not raw:
                break
            pos += len(raw)
            if not raw.strip():
                continue
            stats.lines_read += 1
            try:
                comment = parse_comment_line(raw.decode("utf-8"))
            except (MalformedLine, UnicodeDecodeError):
                stats.malformed += 1
                continue
            score = scorer.transform(comment.body)
            pending.append(
                (comment.id, comment.subreddit, comment.author,
                 comment.score, comment.created_utc, repr(score))
            )
            scores.append(score)
            if len(pending) >= batch_size:
                flush()
    flush()
    return stats


_WORKER = {}


def _worker_init(input_path, model, hv, cfg, forest, fmt):
    _WORKER["input_path"] = input_path
    _WORKER["scorer"] = Scorer(model, hv, cfg)
    _WORKER["forest"] = forest
    _WORKER["fmt"] = fmt


def _worker_run(job):
    start, end, shard_path = job
    with open(shard_path, "w", encoding="utf-8", newline="") as out_fh:
        return _classify_range(
            _WORKER["input_path"], start, end, _WORKER["scorer"],
            _WORKER["forest"], _WORKER["fmt"], out_fh,
        )


def classify_file(input_path, output_path, model, hv: HateVector,
                  cfg: NormalizerConfig, forest: ForestModel | None = None,
                  fmt: str = "csv", workers: int = 1) -> ClassifyStats:
    """Score (and, with a forest, label) every comment in a JSON-lines dump.

    Output is independent of ``workers``: ranges are processed in file
    order and concatenated. CSV output carries a header row; JSON-lines
    does not.
    """
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown output format {fmt!r}")
    if forest is not None:
        check_forest_provenance(forest, model.content_hash(), hv.lexicon_hash)
    columns = CLASSIFIED_COLUMNS if forest is not None else SCORE_COLUMNS
    stats = ClassifyStats()
    tmp = f"{output_path}.tmp"
    try:
        if workers <= 1:
            ranges = _byte_ranges(input_path, 1)
            with open(tmp, "w", encoding="utf-8", newline="") as out_fh:
                if fmt == "csv":
                    out_fh.write(",".join(columns) + "\n")
                scorer = Scorer(model, hv, cfg)
                for start, end in ranges:
                    stats.merge(_classify_range(input_path, start, end, scorer,
                                                forest, fmt, out_fh))
        else:
            ranges = _byte_ranges(input_path, workers)
            jobs = [(start, end, f"{tmp}.shard{i}") for i, (start, end) in enumerate(ranges)]
            ctx = multiprocessing.get_context("fork")
            try:
                with ctx.Pool(
                    processes=min(workers, max(len(jobs), 1)),
                    initializer=_worker_init,
                    initargs=(input_path, model, hv, cfg, forest, fmt),
                ) as pool:
                    for shard_stats in pool.map(_worker_run, jobs):
                        stats.merge(shard_stats)
                with open(tmp, "wb") as out_fh:
                    if fmt == "csv":
                        out_fh.write((",".join(columns) + "\n").encode("utf-8"))
                    for _, _, shard_path in jobs:
                        with open(shard_path, "rb") as shard:
                            shutil.copyfileobj(shard, out_fh, 1 << 20)
            finally:
                for _, _, shard_path in jobs:
                    if os.path.exists(shard_path):
                        os.unlink(shard_path)
        os.replace(tmp, output_path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    return stats


def read_classified(path, taxonomy: SubredditTaxonomy, anchor: int,
                    stats: dict | None = None, fmt: str | None = None):
    """Yield (ClassifiedComment, created_utc) from a classified file.

    Subreddit names are canonicalized to lowercase so downstream grouping
    is case-insensitive. Rows without a label, malformed rows, and rows
    before the anchor are counted into ``stats`` and skipped.
    """
    if stats is None:
        stats = {}
    stats.setdefault("rows", 0)
    stats.setdefault("skipped", 0)
    if fmt is None:
        fmt = "jsonl" if str(path).endswith((".jsonl", ".json")) else "csv"
    for record in _iter_records(path, fmt, stats):
        stats["rows"] += 1
        try:
            label = _LABEL_VALUES[record["label"]]
            subreddit = str(record["subreddit"]).strip().lower()
            created = int(record["created_utc"])
            week = week_of(created, anchor)
            comment = ClassifiedComment(
                id=str(record["id"]),
                author=str(record["author"]),
                subreddit=subreddit,
                category=categorize(subreddit, taxonomy),
                week=week,
                score=int(record["score"]),
                offense_score=float(record["offense_score"]),
                offensive=label,
            )
        except Exception:
            stats["skipped"] += 1
            continue
        yield comment, created


def _iter_records(path, fmt, stats):
    if fmt == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            yield from csv.DictReader(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    stats["rows"] += 1
                    stats["skipped"] += 1
