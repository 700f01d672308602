"""Deterministic text normalization: tokenize, drop stopwords, lemmatize.

The same normalizer instance is applied before embedding training and
before classification, so both sides see bit-identical token streams. The
lemmatizer is a dictionary-plus-suffix-rule scheme (irregular forms first,
then the first matching suffix rule, else identity); it intentionally
trades linguistic coverage for determinism and zero heavyweight
dependencies.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

_EDGE_PUNCT = re.compile(r"^[\W_]+|[\W_]+$")
_URL_PREFIXES = ("http://", "https://", "www.")

# Zipf makes a bounded memo table cover almost every lookup.
_LEMMA_CACHE_MAX = 1 << 20


@dataclass(frozen=True)
class SuffixRule:
    suffix: str
    replacement: str
    min_stem_length: int


@dataclass(frozen=True)
class NormalizerConfig:
    """Stopword set plus lemmatization tables.

    Configs are expected to be idempotent on their own output (re-normalizing
    a normalized sequence is a fixed point); the shipped defaults are tested
    for this property.
    """

    stopwords: frozenset[str]
    lemma_exceptions: Mapping[str, str]
    suffix_rules: tuple[SuffixRule, ...]
    _lemma_cache: dict = field(default_factory=dict, repr=False, compare=False)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on Unicode whitespace; strip edge punctuation.

    Purely-punctuation tokens and URLs are dropped; intra-word apostrophes
    and hyphens survive. Empty input yields an empty list.
    """
    out = []
    for raw in text.lower().split():
        tok = _EDGE_PUNCT.sub("", raw)
        if not tok or tok.startswith(_URL_PREFIXES):
            continue
        out.append(tok)
    return out


def lemmatize(token: str, cfg: NormalizerConfig) -> str:
    """Exception map first, then the first suffix rule whose stem is long
    enough, else the token unchanged."""
    cache = cfg._lemma_cache
    hit = cache.get(token)
    if hit is not None:
        return hit
    lemma = cfg.lemma_exceptions.get(token)
    if lemma is None:
        lemma = token
        for rule in cfg.suffix_rules:
            if token.endswith(rule.suffix) and len(token) - len(rule.suffix) >= rule.min_stem_length:
                lemma = token[: len(token) - len(rule.suffix)] + rule.replacement
                break
    if lemma != token:
        # suffix removal can expose punctuation that was word-internal
        lemma = _EDGE_PUNCT.sub("", lemma)
    if len(cache) < _LEMMA_CACHE_MAX:
        cache[token] = lemma
    return lemma


def normalize(text: str, cfg: NormalizerConfig) -> list[str]:
    """Full pipeline: tokenize, drop stopwords, lemmatize.

    Output tokens are never empty and never in the stopword set (a lemma
    that lands on a stopword is dropped too, which keeps normalization
    idempotent).
    """
    out = []
    stop = cfg.stopwords
    for tok in tokenize(text):
        if tok in stop:
            continue
        lemma = lemmatize(tok, cfg)
        if lemma and lemma not in stop:
            out.append(lemma)
    return out


def load_stopwords(path) -> frozenset[str]:
    """One lowercase token per line; blank lines and # comments ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            entry = line.strip()
            if entry and not entry.startswith("#"):
                words.add(entry.lower())
    return frozenset(words)


def load_lemma_exceptions(path) -> dict[str, str]:
    """TSV of token<TAB>lemma; blank lines and # comments ignored."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            entry = line.rstrip("\n")
            if not entry.strip() or entry.lstrip().startswith("#"):
                continue
            parts = entry.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(f"{path}:{n}: expected token<TAB>lemma")
            table[parts[0].lower()] = parts[1].lower()
    return table


def load_suffix_rules(path) -> tuple[SuffixRule, ...]:
    """JSON array of {suffix, replacement, min_stem_length}, priority order."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError(f"{path}: suffix rules must be a JSON array")
    rules = []
    for item in raw:
        rules.append(
            SuffixRule(
                suffix=str(item["suffix"]),
                replacement=str(item["replacement"]),
                min_stem_length=int(item["min_stem_length"]),
            )
        )
    return tuple(rules)


def _data_path(name: str):
    return resources.files("offspeech").joinpath("data").joinpath(name)


def default_config() -> NormalizerConfig:
    """The versioned in-repo stopword list and lemmatizer tables."""
    with resources.as_file(_data_path("stopwords.txt")) as p:
        stopwords = load_stopwords(p)
    with resources.as_file(_data_path("lemma_exceptions.tsv")) as p:
        exceptions = load_lemma_exceptions(p)
    with resources.as_file(_data_path("suffix_rules.json")) as p:
        rules = load_suffix_rules(p)
    return NormalizerConfig(stopwords=stopwords, lemma_exceptions=exceptions, suffix_rules=rules)


def config_from_files(stopwords_path=None, exceptions_path=None, rules_path=None) -> NormalizerConfig:
    """Build a config from user files, falling back to shipped defaults."""
    base = default_config()
    return NormalizerConfig(
        stopwords=load_stopwords(stopwords_path) if stopwords_path else base.stopwords,
        lemma_exceptions=load_lemma_exceptions(exceptions_path) if exceptions_path else base.lemma_exceptions,
        suffix_rules=load_suffix_rules(rules_path) if rules_path else base.suffix_rules,
    )
