"""Single command-line entry point chaining the pipeline stages.

Every stage resolves its configuration from flags plus an optional JSON
config file (flags win), derives its randomness from the one ``--seed``,
and writes a manifest capturing the fully-resolved run so identical inputs
reproduce identical artifacts.

Exit codes: 0 success, 1 usage, 2 data error, 3 provenance error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from importlib import resources

from . import analytics, classifier, corpus, embedding, hatemodel, pipeline, textnorm
from .errors import OffspeechError, ProvenanceMismatch
from .hashutil import derive_seed, file_sha256

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVENANCE = 3

SEED_DERIVATION = "stage_seed = blake2b(stage_name, key=little_endian_u64(master_seed))"


class _Parser(argparse.ArgumentParser):
    # the spec'd exit-code contract reserves 1 for usage errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class RunConfig:
    """Flag/file/default resolution with a record of every resolved value."""

    def __init__(self, args: argparse.Namespace):
        self.flags = vars(args)
        self.file_values = {}
        config_path = self.flags.get("config")
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                self.file_values = json.load(fh)
        self.resolved = {}
        # common keys land in every manifest even if a stage never reads them
        self.get("seed", 0)
        self.get("workers", 1)
        self.get("out_dir", ".")

    def get(self, key, default=None):
        value = self.flags.get(key)
        if value is None:
            value = self.file_values.get(key, default)
        self.resolved[key] = value
        return value


def parse_instant(text) -> int:
    """Epoch seconds from an integer string or an ISO-8601 instant (naive
    values are taken as UTC)."""
    if isinstance(text, int):
        return text
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        pass
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _write_manifest(out_dir, stage, run: RunConfig, inputs=None, outputs=None, stats=None):
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "stage": stage,
        "config": run.resolved,
        "seed_derivation": SEED_DERIVATION,
        "inputs": {name: {"path": str(p), "sha256": file_sha256(p)}
                   for name, p in (inputs or {}).items()},
        "outputs": {name: {"path": str(p), "sha256": file_sha256(p)}
                    for name, p in (outputs or {}).items()},
        "stats": stats or {},
    }
    path = os.path.join(out_dir, f"{stage}.manifest.json")
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def _normalizer(run: RunConfig) -> textnorm.NormalizerConfig:
    return textnorm.config_from_files(
        run.get("stopwords"),
        run.get("lemma_exceptions"),
        run.get("suffix_rules"),
    )


def _out_dir(run: RunConfig) -> str:
    return run.get("out_dir", ".")


# ---------------------------------------------------------------------------
# stages

def cmd_ingest(run: RunConfig) -> int:
    input_path = run.get("input")
    output_path = run.get("output")
    seed = run.get("seed", 0)
    cfg = corpus.FilterConfig(
        min_body_length=run.get("min_length", 10),
        excluded_author=run.get("excluded_author", "[deleted]"),
        sample_rate=run.get("sample_rate", 0.1),
        sample_seed=derive_seed(seed, "ingest-sampling"),
    )
    window = corpus.StudyWindow(
        start=parse_instant(run.get("window_start")) if run.get("window_start") else None,
        end=parse_instant(run.get("window_end")) if run.get("window_end") else None,
    )
    stats = corpus.IngestStats()
    tmp = f"{output_path}.tmp"
    try:
        with open(input_path, encoding="utf-8") as in_fh, \
                open(tmp, "w", encoding="utf-8") as out_fh:
            for line, _ in corpus.ingest_lines(in_fh, cfg, window, stats):
                out_fh.write(line if line.endswith("\n") else line + "\n")
        os.replace(tmp, output_path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
    _write_manifest(_out_dir(run), "ingest", run,
                    inputs={"comments": input_path},
                    outputs={"accepted": output_path},
                    stats=stats.as_dict())
    for key, value in stats.as_dict().items():
        print(f"{key}: {value}")
    return EXIT_OK


def _corpus_reader(path, cfg):
    def sentences():
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    comment = corpus.parse_comment_line(line)
                except OffspeechError:
                    continue
                tokens = textnorm.normalize(comment.body, cfg)
                if tokens:
                    yield tokens
    return sentences


def cmd_train_embedding(run: RunConfig) -> int:
    input_path = run.get("input")
    model_path = run.get("model_out")
    seed = run.get("seed", 0)
    norm = _normalizer(run)
    cfg = embedding.TrainConfig(
        dim=run.get("dim", 100),
        window=run.get("window", 5),
        negative_samples=run.get("negative", 5),
        epochs=run.get("epochs", 5),
        initial_learning_rate=run.get("learning_rate", 0.025),
        subsample_threshold=run.get("subsample", 1e-3),
        seed=derive_seed(seed, "embedding"),
    )
    model = embedding.train(
        _corpus_reader(input_path, norm), cfg,
        min_count=run.get("min_count", 25),
        workers=run.get("workers", 1),
    )
    model.metadata["corpus_sha256"] = file_sha256(input_path)
    embedding.save(model, model_path)
    _write_manifest(_out_dir(run), "train-embedding", run,
                    inputs={"corpus": input_path},
                    outputs={"model": model_path,
                             "model_meta": embedding._sidecar_path(model_path)},
                    stats={"vocabulary_size": len(model.vocab),
                           "total_tokens": model.vocab.total_tokens,
                           "content_hash": model.content_hash()})
    print(f"vocabulary: {len(model.vocab)} words, model hash {model.content_hash()}")
    return EXIT_OK


def cmd_build_hatevector(run: RunConfig) -> int:
    model_path = run.get("model")
    output_path = run.get("output")
    norm = _normalizer(run)
    tagged = []
    if run.get("hate_words"):
        tagged.append((run.get("hate_words"), "hate"))
    if run.get("offensive_words"):
        tagged.append((run.get("offensive_words"), "offensive"))
    if not tagged:
        print("at least one of --hate-words/--offensive-words is required", file=sys.stderr)
        return EXIT_USAGE
    model = embedding.load(model_path)
    lexicon = hatemodel.OffensiveLexicon.from_files(tagged, norm)
    hv = hatemodel.build_hate_vector(lexicon, model)
    hatemodel.save_hate_vector(hv, output_path)
    _write_manifest(_out_dir(run), "build-hatevector", run,
                    inputs={"model": model_path,
                            **{tag: path for path, tag in tagged}},
                    outputs={"hatevector": output_path},
                    stats={"lexicon_words": len(lexicon.words),
                           "contributing": hv.contributing_count,
                           "missing_from_vocabulary": hv.missing_count,
                           "embedding_hash": hv.embedding_hash,
                           "lexicon_hash": hv.lexicon_hash})
    print(f"hate vector over {hv.contributing_count} words "
          f"({hv.missing_count} lexicon words missing from vocabulary)")
    return EXIT_OK


def _dataset_format(run: RunConfig) -> classifier.DatasetFormat:
    return classifier.DatasetFormat(
        text_column=run.get("text_column", "tweet_text"),
        class_column=run.get("class_column", "does_this_tweet_contain_hate_speech"),
        confidence_column=run.get("confidence_column", "confidence"),
    )


def _load_samples(run: RunConfig, model, hv, norm):
    """Labeled texts -> transform-scalar samples."""
    fmt = _dataset_format(run)
    texts, malformed = classifier.load_labeled_dataset(run.get("dataset"), fmt)
    scorer = hatemodel.Scorer(model, hv, norm)
    samples = [
        classifier.LabeledSample(
            feature=scorer.transform(t.text),
            label=t.label,
            confidence=t.confidence,
            source_text=t.text,
        )
        for t in texts
    ]
    threshold = run.get("confidence_threshold", 0.0)
    return classifier.filter_by_confidence(samples, threshold), malformed


def _forest_config(run: RunConfig) -> classifier.ForestConfig:
    depth = run.get("max_depth")
    return classifier.ForestConfig(
        n_estimators=run.get("n_estimators", 100),
        max_depth=None if depth in (None, "none", "None") else int(depth),
        min_samples_leaf=run.get("min_samples_leaf", 1),
        bootstrap=True,
    )


def _metrics_dict(m: classifier.Metrics) -> dict:
    return {
        "accuracy": m.accuracy, "precision": m.precision, "recall": m.recall,
        "f1": m.f1, "tp": m.tp, "fp": m.fp, "tn": m.tn, "fn": m.fn,
        "precision_degenerate": m.precision_degenerate,
        "recall_degenerate": m.recall_degenerate,
    }


def _cv_dict(result: classifier.CVResult) -> dict:
    return {
        "mean_accuracy": result.mean_accuracy,
        "mean_precision": result.mean_precision,
        "mean_recall": result.mean_recall,
        "mean_f1": result.mean_f1,
        "fold_sizes": result.fold_sizes,
        "fold_class_counts": result.fold_class_counts,
        "folds": [_metrics_dict(m) for m in result.fold_metrics],
    }


def cmd_train_classifier(run: RunConfig) -> int:
    model = embedding.load(run.get("model"))
    hv = hatemodel.load_hate_vector(run.get("hatevector"))
    norm = _normalizer(run)
    seed = derive_seed(run.get("seed", 0), "classifier")
    samples, malformed = _load_samples(run, model, hv, norm)

    holdout_fraction = run.get("holdout", 0.25)
    train_set, holdout_set = classifier.holdout_split(samples, holdout_fraction, seed)

    stats = {"samples": len(samples), "malformed_rows": malformed,
             "n_train": len(train_set), "n_holdout": len(holdout_set)}
    if run.get("grid"):
        search = classifier.grid_search(train_set, classifier.default_grid(),
                                        k=run.get("kfold", 10), seed=seed)
        config = search.best_config
        stats["grid_best"] = {"n_estimators": config.n_estimators,
                              "max_depth": config.max_depth,
                              "min_samples_leaf": config.min_samples_leaf,
                              "mean_f1": search.best_result.mean_f1}
    else:
        config = _forest_config(run)

    forest = classifier.train_forest(
        train_set, config, seed,
        metadata={"feature": {"embedding_hash": hv.embedding_hash,
                              "lexicon_hash": hv.lexicon_hash}},
    )
    classifier.save_forest(forest, run.get("forest_out"))
    stats["holdout_metrics"] = _metrics_dict(classifier.evaluate(forest, holdout_set))
    stats["forest_hash"] = classifier.forest_content_hash(forest)
    _write_manifest(_out_dir(run), "train-classifier", run,
                    inputs={"model": run.get("model"),
                            "hatevector": run.get("hatevector"),
                            "dataset": run.get("dataset")},
                    outputs={"forest": run.get("forest_out")},
                    stats=stats)
    hm = stats["holdout_metrics"]
    print(f"holdout accuracy {hm['accuracy']:.3f} f1 {hm['f1']:.3f} "
          f"on {len(holdout_set)} samples")
    return EXIT_OK


def cmd_evaluate(run: RunConfig) -> int:
    model = embedding.load(run.get("model"))
    hv = hatemodel.load_hate_vector(run.get("hatevector"))
    norm = _normalizer(run)
    seed = derive_seed(run.get("seed", 0), "evaluate")
    out_dir = _out_dir(run)
    os.makedirs(out_dir, exist_ok=True)
    samples, malformed = _load_samples(run, model, hv, norm)
    config = _forest_config(run)
    stats = {"samples": len(samples), "malformed_rows": malformed}
    outputs = {}

    holdout_fraction = run.get("holdout")
    if holdout_fraction is not None:
        train_set, holdout_set = classifier.holdout_split(samples, holdout_fraction, seed)
    else:
        train_set, holdout_set = samples, None

    if run.get("grid"):
        search = classifier.grid_search(train_set, classifier.default_grid(),
                                        k=run.get("kfold", 10), seed=seed)
        config = search.best_config
        path = os.path.join(out_dir, "grid.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n_estimators", "max_depth", "min_samples_leaf",
                             "mean_accuracy", "mean_f1"])
            for cfg, result in search.table:
                writer.writerow([cfg.n_estimators, cfg.max_depth, cfg.min_samples_leaf,
                                 repr(result.mean_accuracy), repr(result.mean_f1)])
        outputs["grid"] = path
        stats["grid_best"] = {"n_estimators": config.n_estimators,
                              "max_depth": config.max_depth,
                              "min_samples_leaf": config.min_samples_leaf}

    if run.get("kfold") is not None or not (run.get("sweep") or run.get("baselines")
                                            or run.get("grid") or holdout_fraction is not None):
        k = run.get("kfold", 10) or 10
        result = classifier.kfold_cv(train_set, k, config, seed)
        path = os.path.join(out_dir, "kfold.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_cv_dict(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs["kfold"] = path
        stats["kfold_mean_accuracy"] = result.mean_accuracy
        stats["kfold_mean_f1"] = result.mean_f1

    if holdout_fraction is not None:
        forest = classifier.train_forest(train_set, config, seed)
        metrics = classifier.evaluate(forest, holdout_set)
        path = os.path.join(out_dir, "holdout.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"holdout_fraction": holdout_fraction,
                       "n_train": len(train_set), "n_holdout": len(holdout_set),
                       "metrics": _metrics_dict(metrics)}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs["holdout"] = path
        stats["holdout_accuracy"] = metrics.accuracy
        stats["holdout_f1"] = metrics.f1

    if run.get("sweep"):
        rows, skipped = classifier.sweep_holdout_and_confidence(
            samples, config=config, seed=seed)
        path = os.path.join(out_dir, "sweep.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(classifier.sweep_rows_to_csv(rows))
        outputs["sweep"] = path
        stats["sweep_rows"] = len(rows)
        stats["sweep_skipped"] = [
            {"holdout_frac": f, "conf_threshold": t, "reason": r} for f, t, r in skipped
        ]

    if run.get("baselines"):
        table = classifier.train_baselines(train_set, seed, k=run.get("kfold", 10) or 10)
        path = os.path.join(out_dir, "baselines.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["classifier", "mean_accuracy", "mean_f1"])
            for name, result in table:
                writer.writerow([name, repr(result.mean_accuracy), repr(result.mean_f1)])
        outputs["baselines"] = path
        stats["baselines"] = {name: {"mean_accuracy": r.mean_accuracy,
                                     "mean_f1": r.mean_f1} for name, r in table}

    _write_manifest(out_dir, "evaluate", run,
                    inputs={"model": run.get("model"),
                            "hatevector": run.get("hatevector"),
                            "dataset": run.get("dataset")},
                    outputs=outputs, stats=stats)
    for name, path in outputs.items():
        print(f"{name}: {path}")
    return EXIT_OK


def cmd_classify(run: RunConfig) -> int:
    model = embedding.load(run.get("model"))
    hv = hatemodel.load_hate_vector(run.get("hatevector"))
    norm = _normalizer(run)
    forest = None
    if run.get("forest"):
        forest = classifier.load_forest(run.get("forest"))
    stats = pipeline.classify_file(
        run.get("input"), run.get("output"), model, hv, norm,
        forest=forest,
        fmt=run.get("format", "csv"),
        workers=run.get("workers", 1),
    )
    inputs = {"comments": run.get("input"), "model": run.get("model"),
              "hatevector": run.get("hatevector")}
    if run.get("forest"):
        inputs["forest"] = run.get("forest")
    _write_manifest(_out_dir(run), "classify", run,
                    inputs=inputs,
                    outputs={"classified": run.get("output")},
                    stats=stats.as_dict())
    print(f"classified {stats.written} comments "
          f"({stats.malformed} malformed lines skipped)")
    return EXIT_OK


def _load_taxonomy(run: RunConfig) -> corpus.SubredditTaxonomy:
    path = run.get("taxonomy")
    if path:
        return corpus.SubredditTaxonomy.from_json_file(path)
    with resources.as_file(
        resources.files("offspeech").joinpath("data/taxonomy.json")
    ) as p:
        return corpus.SubredditTaxonomy.from_json_file(p)


def cmd_analyze(run: RunConfig) -> int:
    taxonomy = _load_taxonomy(run)
    anchor = parse_instant(run.get("anchor", corpus.DEFAULT_ANCHOR))
    cutover = parse_instant(run.get("cutover", "2016-07-01"))
    cutover_week = corpus.week_of(max(cutover, anchor), anchor)
    out_dir = _out_dir(run)
    os.makedirs(out_dir, exist_ok=True)
    input_path = run.get("input")
    min_comments = run.get("min_subreddit_comments", 1000)
    destination = run.get("flow_destination", "politics")
    min_flow = run.get("min_flow", 200)
    spill_buckets = run.get("spill_buckets", 0)
    read_stats = {}
    stream = pipeline.read_classified(input_path, taxonomy, anchor, read_stats)

    if spill_buckets:
        # per-author state goes through disk buckets instead of one big map
        with tempfile.TemporaryDirectory(prefix="offspeech-spill-") as spill_dir:
            spilled = analytics.spill_aggregate(stream, spill_dir, spill_buckets)
            timeline = analytics.finalize_timeline(spilled.timeline, cutover_week)
            max_week = len(timeline.rows) - 1 if timeline.rows else None
            scores = analytics.finalize_scores(spilled.scores, max_week)
            authors = analytics.finalize_authors_spilled(
                spilled.bucket_paths, os.path.join(out_dir, "author_summary.csv"))
            subreddits = analytics.finalize_subreddits(spilled.subreddits, min_comments)
            flow_edges = analytics.finalize_flow_spilled(
                spilled.bucket_paths, destination, min_flow)
            comment_count = spilled.comment_count
    else:
        agg = analytics.aggregate_sharded(stream, workers=run.get("workers", 1))
        timeline = analytics.finalize_timeline(agg.timeline, cutover_week)
        max_week = len(timeline.rows) - 1 if timeline.rows else None
        scores = analytics.finalize_scores(agg.scores, max_week)
        authors = analytics.finalize_authors(agg.authors)
        subreddits = analytics.finalize_subreddits(agg.subreddits, min_comments)
        flow_edges = analytics.finalize_flow(agg.flow, destination, min_flow)
        comment_count = agg.comment_count

    manifest = {
        "stage": "analyze",
        "config": run.resolved,
        "seed_derivation": SEED_DERIVATION,
        "inputs": {"classified": {"path": str(input_path),
                                  "sha256": file_sha256(input_path)}},
        "anchor": anchor,
        "cutover_week": cutover_week,
        "read_stats": read_stats,
        "comment_count": comment_count,
    }
    paths = analytics.emit_report(out_dir, timeline, scores, authors,
                                  subreddits, flow_edges, manifest)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring

def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags win over its values")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--workers", type=int, help="worker count for sharded stages")
    p.add_argument("--out-dir", dest="out_dir", help="directory for manifests and reports")


def _add_normalizer_flags(p):
    p.add_argument("--stopwords", help="stopword file (default: shipped list)")
    p.add_argument("--lemma-exceptions", dest="lemma_exceptions",
                   help="lemma exception TSV (default: shipped table)")
    p.add_argument("--suffix-rules", dest="suffix_rules",
                   help="suffix rule JSON (default: shipped rules)")


def _add_dataset_flags(p):
    p.add_argument("--dataset", help="labeled CSV path")
    p.add_argument("--text-column", dest="text_column")
    p.add_argument("--class-column", dest="class_column")
    p.add_argument("--confidence-column", dest="confidence_column")
    p.add_argument("--confidence-threshold", dest="confidence_threshold", type=float)


def _add_forest_flags(p):
    p.add_argument("--n-estimators", dest="n_estimators", type=int)
    p.add_argument("--max-depth", dest="max_depth")
    p.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="offspeech",
                     description="Offensive-speech classification and measurement pipeline")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="filter and sample a raw comment dump")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--min-length", dest="min_length", type=int)
    p.add_argument("--sample-rate", dest="sample_rate", type=float)
    p.add_argument("--excluded-author", dest="excluded_author")
    p.add_argument("--window-start", dest="window_start")
    p.add_argument("--window-end", dest="window_end")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-embedding", help="train the SGNS embedding")
    _add_common(p)
    _add_normalizer_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--model-out", dest="model_out", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negative", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--subsample", type=float)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.set_defaults(func=cmd_train_embedding)

    p = sub.add_parser("build-hatevector", help="mean vector of the offensive lexicons")
    _add_common(p)
    _add_normalizer_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--hate-words", dest="hate_words")
    p.add_argument("--offensive-words", dest="offensive_words")
    p.set_defaults(func=cmd_build_hatevector)

    p = sub.add_parser("train-classifier", help="train the random forest on labeled data")
    _add_common(p)
    _add_normalizer_flags(p)
    _add_dataset_flags(p)
    _add_forest_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--hatevector", required=True)
    p.add_argument("--forest-out", dest="forest_out", required=True)
    p.add_argument("--holdout", type=float)
    p.add_argument("--kfold", type=int)
    p.add_argument("--grid", action="store_true", default=None)
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("evaluate", help="cross-validation, holdout, sweep, baselines")
    _add_common(p)
    _add_normalizer_flags(p)
    _add_dataset_flags(p)
    _add_forest_flags(p)
    p.add_argument("--model", required=True)
    p.add_argument("--hatevector", required=True)
    p.add_argument("--kfold", type=int)
    p.add_argument("--holdout", type=float)
    p.add_argument("--sweep", action="store_true", default=None)
    p.add_argument("--baselines", action="store_true", default=None)
    p.add_argument("--grid", action="store_true", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="score and label a comment dump")
    _add_common(p)
    _add_normalizer_flags(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--hatevector", required=True)
    p.add_argument("--forest", help="omit to emit offense scores without labels")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("analyze", help="measurement suite over classified comments")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--taxonomy", help="subreddit taxonomy JSON (default: shipped reference)")
    p.add_argument("--anchor", help="week-0 instant (default 2015-01-01T00:00:00Z)")
    p.add_argument("--cutover", help="pre/post comparison boundary (default 2016-07-01)")
    p.add_argument("--min-subreddit-comments", dest="min_subreddit_comments", type=int)
    p.add_argument("--flow-destination", dest="flow_destination")
    p.add_argument("--min-flow", dest="min_flow", type=int)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        run = RunConfig(args)
        return args.func(run)
    except ProvenanceMismatch as exc:
        print(f"provenance error: {exc}", file=sys.stderr)
        return EXIT_PROVENANCE
    except (OffspeechError, OSError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
