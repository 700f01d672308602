"""Hate vector construction and the max-cosine text transform.

A text maps to one scalar: the maximum cosine similarity between any of its
normalized tokens and the mean vector of the offensive lexicon. Tokens
outside the vocabulary are represented by 0-vectors and so contribute a
neutral 0 to the max.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingModel
from .errors import NoLexiconWordInVocabulary, ProvenanceMismatch
from .hashutil import checksum64
from .textnorm import NormalizerConfig, normalize


@dataclass
class OffensiveLexicon:
    """Deduplicated, lemmatized lexicon entries with their source tags."""

    words: list[str]
    tags: dict[str, str]
    skipped_empty: int = 0

    def content_hash(self) -> str:
        blob = "\n".join(f"{w}\t{self.tags[w]}" for w in self.words)
        return checksum64(blob.encode("utf-8")).hex()

    @classmethod
    def from_entries(cls, tagged_entries, cfg: NormalizerConfig) -> "OffensiveLexicon":
        """Normalize raw entries with the corpus normalizer.

        Multi-word entries are split and each unigram contributes; words are
        deduplicated after lemmatization (first source tag wins). Entries
        that normalize to nothing are counted, not fatal.
        """
        words: list[str] = []
        tags: dict[str, str] = {}
        skipped = 0
        for entry, tag in tagged_entries:
            lemmas = normalize(entry, cfg)
            if not lemmas:
                skipped += 1
                continue
            for lemma in lemmas:
                if lemma not in tags:
                    tags[lemma] = tag
                    words.append(lemma)
        if not words:
            raise ValueError("lexicon is empty after normalization")
        return cls(words=words, tags=tags, skipped_empty=skipped)

    @classmethod
    def from_files(cls, tagged_paths, cfg: NormalizerConfig) -> "OffensiveLexicon":
        """tagged_paths: iterable of (path, source_tag)."""
        entries = []
        for path, tag in tagged_paths:
            entries.extend((e, tag) for e in read_lexicon_file(path))
        return cls.from_entries(entries, cfg)


def read_lexicon_file(path) -> list[str]:
    """UTF-8, one entry per line, # comments and blank lines ignored."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            entry = line.strip()
            if entry and not entry.startswith("#"):
                entries.append(entry)
    return entries


@dataclass
class HateVector:
    """Mean embedding vector of the in-vocabulary lexicon words."""

    h: np.ndarray
    contributing_count: int
    missing_count: int
    embedding_hash: str
    lexicon_hash: str

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=np.float64)
        self.h.flags.writeable = False
        if self.contributing_count < 1:
            raise ValueError("hate vector needs at least one contributing word")


def build_hate_vector(lexicon: OffensiveLexicon, model: EmbeddingModel) -> HateVector:
    """Arithmetic mean over vectors of lexicon words found in the vocabulary.

    Absent words are skipped and counted. Raises
    :class:`NoLexiconWordInVocabulary` when nothing is found.
    """
    rows = []
    missing = 0
    for word in lexicon.words:
        vec = model.vector(word)
        if vec is None:
            missing += 1
        else:
            rows.append(vec.astype(np.float64))
    if not rows:
        raise NoLexiconWordInVocabulary(
            f"none of the {len(lexicon.words)} lexicon words are in the vocabulary"
        )
    h = np.mean(np.stack(rows), axis=0)
    return HateVector(
        h=h,
        contributing_count=len(rows),
        missing_count=missing,
        embedding_hash=model.content_hash(),
        lexicon_hash=lexicon.content_hash(),
    )


def save_hate_vector(hv: HateVector, path) -> None:
    doc = {
        "format": "offspeech-hatevector",
        "version": 1,
        "h": hv.h.tolist(),
        "contributing_count": hv.contributing_count,
        "missing_count": hv.missing_count,
        "embedding_hash": hv.embedding_hash,
        "lexicon_hash": hv.lexicon_hash,
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    os.replace(tmp, path)


def load_hate_vector(path) -> HateVector:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return HateVector(
        h=np.asarray(doc["h"], dtype=np.float64),
        contributing_count=doc["contributing_count"],
        missing_count=doc.get("missing_count", 0),
        embedding_hash=doc["embedding_hash"],
        lexicon_hash=doc["lexicon_hash"],
    )


@dataclass
class TransformCounter:
    """Instrumentation: number of per-token distance computations."""

    distance_computations: int = 0
    comments: int = 0


def _check_provenance(hv: HateVector, model: EmbeddingModel) -> None:
    model_hash = model.content_hash()
    if hv.embedding_hash != model_hash:
        raise ProvenanceMismatch(
            f"hate vector built on embedding {hv.embedding_hash}, "
            f"but this model is {model_hash}"
        )


class Scorer:
    """Reusable transform context with per-word cosines precomputed.

    cos(s_i, H) depends only on the word, so one pass over the vocabulary
    replaces per-comment matrix work with table lookups. Each in-vocabulary
    token still counts as one distance computation.
    """

    def __init__(self, model: EmbeddingModel, hv: HateVector, cfg: NormalizerConfig,
                 counter: TransformCounter | None = None):
        _check_provenance(hv, model)
        self.cfg = cfg
        self.counter = counter
        self._index = model.vocab.index
        vectors = model.input_vectors.astype(np.float64)
        norms = np.linalg.norm(vectors, axis=1)
        h_norm = np.linalg.norm(hv.h)
        denom = norms * h_norm
        safe = denom > 0.0
        table = np.zeros(len(norms), dtype=np.float64)
        if h_norm > 0.0:
            table[safe] = np.clip((vectors[safe] @ hv.h) / denom[safe], -1.0, 1.0)
        self._cos_table = table

    def transform(self, text: str) -> float:
        tokens = normalize(text, self.cfg)
        if not tokens:
            return 0.0
        best = -1.0
        hits = 0
        index = self._index
        table = self._cos_table
        saw_oov = False
        for tok in tokens:
            idx = index.get(tok)
            if idx is None:
                saw_oov = True
                continue
            hits += 1
            c = table[idx]
            if c > best:
                best = c
        if self.counter is not None:
            self.counter.distance_computations += hits
            self.counter.comments += 1
        # an OOV token contributes a 0-vector, i.e. cosine 0, to the max
        if saw_oov and best < 0.0:
            best = 0.0
        return float(best)


def transform(text: str, model: EmbeddingModel, hv: HateVector,
              cfg: NormalizerConfig, counter: TransformCounter | None = None) -> float:
    """Max over tokens of cos(token vector, H); 0 for empty token sequences.

    Direct (non-table) computation; :class:`Scorer` is the batch path and
    computes identical values.
    """
    _check_provenance(hv, model)
    tokens = normalize(text, cfg)
    if not tokens:
        return 0.0
    rows = []
    oov = 0
    for tok in tokens:
        vec = model.vector(tok)
        if vec is None:
            oov += 1
        else:
            rows.append(vec.astype(np.float64))
    if counter is not None:
        counter.distance_computations += len(rows)
        counter.comments += 1
    h_norm = np.linalg.norm(hv.h)
    cosines = [0.0] * oov
    if rows and h_norm > 0.0:
        mat = np.stack(rows)
        norms = np.linalg.norm(mat, axis=1)
        scores = np.zeros(len(rows))
        safe = norms > 0.0
        scores[safe] = np.clip((mat[safe] @ hv.h) / (norms[safe] * h_norm), -1.0, 1.0)
        cosines.extend(scores.tolist())
    elif rows:
        cosines.extend([0.0] * len(rows))
    return float(max(cosines))


def score_corpus(comments, model: EmbeddingModel, hv: HateVector,
                 cfg: NormalizerConfig, counter: TransformCounter | None = None,
                 error_count: list | None = None):
    """Yield (comment, offense_score) per input comment, order-stable.

    Per-comment failures are counted into ``error_count[0]`` and skipped,
    never fatal.
    """
    scorer = Scorer(model, hv, cfg, counter=counter)
    for comment in comments:
        try:
            yield comment, scorer.transform(comment.body)
        except Exception:
            if error_count is not None:
                error_count[0] += 1
