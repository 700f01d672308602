"""Shared helpers for driving the CLI in-process from tests."""

import os

import synthcorpus
from offspeech import cli


def run_cli(*args):
    """Invoke the CLI in-process, normalizing argparse's SystemExit."""
    try:
        return cli.main([str(a) for a in args])
    except SystemExit as exc:
        return exc.code


ARTIFACTS = ["accepted.jsonl", "model.bin", "model.bin.meta.json", "hv.json",
             "forest.bin", "classified.csv",
             "report/timeline.csv", "report/scores.csv", "report/authors_cdf.csv",
             "report/author_summary.csv", "report/subreddits.csv", "report/flow.csv",
             "report/manifest.json"]


def build_pipeline(workdir, seed=3, n_comments=2500, workers=None):
    """Run every stage on the synthetic fixture inside workdir (relative
    paths so manifests are location-independent)."""
    os.makedirs(workdir, exist_ok=True)
    cwd = os.getcwd()
    os.chdir(workdir)
    try:
        synthcorpus.write_jsonl(synthcorpus.make_comments(seed=11, n=n_comments), "dump.jsonl")
        synthcorpus.write_labeled_csv("labeled.csv", seed=12, n=800)
        synthcorpus.write_lexicon("hate.txt", synthcorpus.NASTY_WORDS[:8])
        synthcorpus.write_lexicon("offensive.txt", synthcorpus.NASTY_WORDS[8:] + ["unseenword9"])

        steps = [
            ("ingest", ["ingest", "--input", "dump.jsonl", "--output", "accepted.jsonl",
                        "--sample-rate", "1.0"]),
            ("train-embedding", ["train-embedding", "--input", "accepted.jsonl",
                                 "--model-out", "model.bin", "--dim", "16",
                                 "--window", "3", "--epochs", "2", "--min-count", "5",
                                 "--subsample", "0"]),
            ("build-hatevector", ["build-hatevector", "--model", "model.bin",
                                  "--output", "hv.json", "--hate-words", "hate.txt",
                                  "--offensive-words", "offensive.txt"]),
            ("train-classifier", ["train-classifier", "--model", "model.bin",
                                  "--hatevector", "hv.json", "--dataset", "labeled.csv",
                                  "--forest-out", "forest.bin", "--n-estimators", "20"]),
            ("classify", ["classify", "--input", "accepted.jsonl", "--model", "model.bin",
                          "--hatevector", "hv.json", "--forest", "forest.bin",
                          "--output", "classified.csv"]
                         + (["--workers", str(workers)] if workers else [])),
            ("analyze", ["analyze", "--input", "classified.csv", "--out-dir", "report",
                         "--min-subreddit-comments", "10", "--min-flow", "2",
                         "--flow-destination", "politics"]),
        ]
        for name, args in steps:
            rc = run_cli(*args, "--seed", seed)
            assert rc == 0, f"stage {name} failed with {rc}"
    finally:
        os.chdir(cwd)
