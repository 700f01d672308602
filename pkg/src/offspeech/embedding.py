"""Skip-gram negative-sampling embeddings trained from normalized corpora.

The trainer follows the de-facto defaults of the classic implementation:
dynamic window, unigram^0.75 negative-sampling distribution, frequent-word
subsampling, linearly decayed learning rate. Training is bit-deterministic
with a fixed seed and a single worker; multi-worker mode uses lock-free
racy updates on the shared weight matrices and is documented as
nondeterministic.
"""

from __future__ import annotations

import io
import json
import os
import struct
import threading
from collections import Counter
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ChecksumMismatch, EmptyVocabulary, ModelFormatError, NonFiniteUpdate
from .hashutil import checksum64, derive_seed

MAGIC = b"OFFEMB1\x00"

# Negative-sampling draws are integers in [0, _TABLE_DOMAIN) searched against
# the cumulative unigram^0.75 table.
_TABLE_DOMAIN = 2**31 - 1

_MIN_ALPHA_FACTOR = 1e-4


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 100
    window: int = 5
    negative_samples: int = 5
    epochs: int = 5
    initial_learning_rate: float = 0.025
    subsample_threshold: float = 1e-3  # 0 disables subsampling
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negative_samples < 1:
            raise ValueError("negative_samples must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.initial_learning_rate <= 0:
            raise ValueError("initial_learning_rate must be positive")
        if self.subsample_threshold < 0:
            raise ValueError("subsample_threshold must be >= 0")


class Vocabulary:
    """Dense word index ordered by descending frequency, ties lexicographic.

    ``counts`` may be None for models loaded from a bare binary file with no
    metadata sidecar; freshly built vocabularies always carry exact counts.
    """

    __slots__ = ("words", "index", "counts", "min_count", "total_tokens")

    def __init__(self, words, counts, min_count):
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.counts = None if counts is None else np.asarray(counts, dtype=np.int64)
        self.min_count = min_count
        self.total_tokens = 0 if self.counts is None else int(self.counts.sum())

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index


def build_vocab(corpus, min_count: int = 25) -> Vocabulary:
    """Exact global token counts; words below ``min_count`` are dropped."""
    counter = Counter()
    for sentence in _iter_corpus(corpus):
        counter.update(sentence)
    kept = [(w, c) for w, c in counter.items() if c >= min_count]
    if not kept:
        raise EmptyVocabulary(f"no word occurs at least {min_count} times")
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in kept], [c for _, c in kept], min_count)


class EmbeddingModel:
    """Immutable trained embedding: vocabulary plus per-word vectors."""

    def __init__(self, dim, vocab, input_vectors, output_vectors=None, metadata=None):
        self.dim = dim
        self.vocab = vocab
        self.input_vectors = input_vectors
        self.output_vectors = output_vectors
        self.metadata = metadata or {}
        self._content_hash = None
        input_vectors.flags.writeable = False
        if output_vectors is not None:
            output_vectors.flags.writeable = False

    def vector(self, word: str):
        """Input vector for an in-vocabulary word, else None."""
        idx = self.vocab.index.get(word)
        if idx is None:
            return None
        return self.input_vectors[idx]

    def content_hash(self) -> str:
        """Hex checksum of the canonical binary payload; doubles as the
        model identity for provenance checks."""
        if self._content_hash is None:
            h = checksum64(b"".join(_iter_payload(self)))
            self._content_hash = h.hex()
        return self._content_hash


def vector(model: EmbeddingModel, word: str):
    return model.vector(word)


def cosine(a, b) -> float:
    """dot(a,b)/(|a||b|); 0.0 when either norm is zero.

    The zero convention makes out-of-vocabulary tokens (represented by
    0-vectors) contribute a neutral floor instead of NaN.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    # rounding can push |result| a few ulp past 1; the contract is [-1, 1]
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def _sigmoid(x):
    # Clipping at |x| = 60 is exact to f64 resolution and avoids overflow.
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def pair_objective(center_vec, ctx_matrix, labels) -> float:
    """SGNS objective for one center against its positive + negative rows:
    sum of log sigma(score) for label 1 and log sigma(-score) for label 0."""
    scores = ctx_matrix @ center_vec
    p = _sigmoid(scores)
    eps = 1e-300
    return float(np.sum(labels * np.log(p + eps) + (1.0 - labels) * np.log(1.0 - p + eps)))


def pair_gradient(center_vec, ctx_matrix, labels):
    """Analytic ascent direction of :func:`pair_objective`.

    Returns (grad_center, grad_ctx_rows) evaluated at the given point.
    """
    scores = ctx_matrix @ center_vec
    g = labels - _sigmoid(scores)
    return g @ ctx_matrix, np.outer(g, center_vec)


def _iter_corpus(corpus):
    if callable(corpus):
        return corpus()
    return iter(corpus)


def _reiterable(corpus):
    if callable(corpus) or isinstance(corpus, (list, tuple)):
        return corpus
    return list(corpus)


def _initial_matrices(vocab_size: int, dim: int, seed: int):
    """Seeded init: inputs uniform in [-0.5/dim, 0.5/dim), outputs zero."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "embedding-init")))
    syn0 = ((rng.random((vocab_size, dim), dtype=np.float32) - 0.5) / dim).astype(np.float32)
    syn1 = np.zeros((vocab_size, dim), dtype=np.float32)
    return syn0, syn1


def _keep_probabilities(counts, threshold):
    """word2vec subsampling: keep prob (sqrt(f/(tT)) + 1) * tT/f, capped at 1."""
    if threshold <= 0:
        return None
    total = counts.sum()
    ratio = threshold * total / counts
    return np.minimum(1.0, (np.sqrt(1.0 / ratio) + 1.0) * ratio)


def _cumulative_table(counts):
    cum = np.cumsum(counts.astype(np.float64) ** 0.75)
    return (cum / cum[-1] * _TABLE_DOMAIN).astype(np.int64)


def _train_shard(sentences, vocab, cfg, syn0, syn1, cum_table, keep_p,
                 total_words, progress, rng):
    """Sequential SGD over one shard of sentences. Mutates syn0/syn1.

    Overflow in a blown-up run surfaces as NonFiniteUpdate after the epoch,
    not as numpy warnings mid-loop.
    """
    window = cfg.window
    k = cfg.negative_samples
    alpha0 = cfg.initial_learning_rate
    min_alpha = alpha0 * _MIN_ALPHA_FACTOR
    word_index = vocab.index
    labels = np.zeros(k + 1, dtype=np.float64)
    labels[0] = 1.0

    with np.errstate(over="ignore", invalid="ignore"):
        for sentence in sentences:
            ids = [word_index[w] for w in sentence if w in word_index]
            progress[0] += len(ids)
            alpha = max(min_alpha, alpha0 * (1.0 - progress[0] / (total_words + 1)))
            if not ids:
                continue
            if keep_p is not None:
                ids = [i for i, r in zip(ids, rng.random(len(ids))) if r < keep_p[i]]
                if not ids:
                    continue
            n = len(ids)
            spans = rng.integers(1, window + 1, size=n)
            centers, targets = [], []
            for i in range(n):
                span = spans[i]
                for j in range(max(0, i - span), min(n, i + span + 1)):
                    if j != i:
                        centers.append(ids[i])
                        targets.append(ids[j])
            if not centers:
                continue
            # one negative-sampling draw per sentence, not per pair
            negs = cum_table.searchsorted(
                rng.integers(0, _TABLE_DOMAIN, size=(len(centers), k)), side="right"
            )
            for p, center in enumerate(centers):
                target = targets[p]
                neg = negs[p]
                neg = neg[neg != target]
                rows = np.empty(len(neg) + 1, dtype=np.int64)
                rows[0] = target
                rows[1:] = neg
                ctx = syn1[rows]
                v = syn0[center]
                g = (labels[: len(rows)] - _sigmoid(ctx @ v)) * alpha
                # outer() reads v before the in-place center update below.
                np.add.at(syn1, rows, np.outer(g, v).astype(np.float32))
                v += (g @ ctx).astype(np.float32)


def train(corpus, cfg: TrainConfig, min_count: int = 25, workers: int = 1) -> EmbeddingModel:
    """Train an SGNS embedding over a corpus of token sequences.

    ``corpus`` may be a sequence of sentences or a zero-argument callable
    returning a fresh iterator (for file-backed streams re-read per epoch).
    With ``workers`` > 1, sentence shards race on the shared matrices.
    """
    corpus = _reiterable(corpus)
    vocab = build_vocab(corpus, min_count)
    syn0, syn1 = _initial_matrices(len(vocab), cfg.dim, cfg.seed)
    cum_table = _cumulative_table(vocab.counts)
    keep_p = _keep_probabilities(vocab.counts, cfg.subsample_threshold)
    total_words = vocab.total_tokens * max(cfg.epochs, 1)
    progress = [0]

    for epoch in range(cfg.epochs):
        if workers <= 1:
            rng = np.random.Generator(
                np.random.PCG64(derive_seed(cfg.seed, f"embedding-epoch-{epoch}"))
            )
            _train_shard(_iter_corpus(corpus), vocab, cfg, syn0, syn1,
                         cum_table, keep_p, total_words, progress, rng)
        else:
            shards = [[] for _ in range(workers)]
            for s, sentence in enumerate(_iter_corpus(corpus)):
                shards[s % workers].append(sentence)
            threads = []
            for w, shard in enumerate(shards):
                rng = np.random.Generator(
                    np.random.PCG64(derive_seed(cfg.seed, f"embedding-epoch-{epoch}-worker-{w}"))
                )
                t = threading.Thread(
                    target=_train_shard,
                    args=(shard, vocab, cfg, syn0, syn1, cum_table, keep_p,
                          total_words, progress, rng),
                )
                threads.append(t)
                t.start()
            for t in threads:
                t.join()
        if not (np.isfinite(syn0).all() and np.isfinite(syn1).all()):
            raise NonFiniteUpdate(f"non-finite weights after epoch {epoch}")

    metadata = {"train_config": asdict(cfg), "min_count": min_count, "workers": workers}
    return EmbeddingModel(cfg.dim, vocab, syn0, syn1, metadata)


def _iter_payload(model: EmbeddingModel):
    """Binary payload chunks: header, then word records in index order."""
    yield MAGIC
    yield struct.pack("<IQ", model.dim, len(model.vocab))
    vectors = np.ascontiguousarray(model.input_vectors, dtype="<f4")
    for i, word in enumerate(model.vocab.words):
        encoded = word.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ModelFormatError(f"word too long to serialize: {len(encoded)} bytes")
        yield struct.pack("<H", len(encoded))
        yield encoded
        yield vectors[i].tobytes()


def save(model: EmbeddingModel, path) -> None:
    """Write the binary model plus a JSON metadata sidecar.

    Binary layout: magic, u32 dim, u64 vocab size, per word a u16 UTF-8
    byte length + word + dim little-endian f32s, then an 8-byte checksum of
    everything before it. The sidecar carries frequencies and training
    metadata, which the fixed binary layout has no room for.
    """
    payload = b"".join(_iter_payload(model))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
        fh.write(checksum64(payload))
    os.replace(tmp, path)
    sidecar = {
        "format": "offspeech-embedding-meta",
        "version": 1,
        "content_hash": model.content_hash(),
        "min_count": model.vocab.min_count,
        "total_tokens": model.vocab.total_tokens,
        "counts": None if model.vocab.counts is None else model.vocab.counts.tolist(),
        "metadata": model.metadata,
    }
    side_tmp = f"{_sidecar_path(path)}.tmp"
    with open(side_tmp, "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")
    os.replace(side_tmp, _sidecar_path(path))


def _sidecar_path(path):
    return f"{path}.meta.json"


def load(path) -> EmbeddingModel:
    """Read a binary model, verifying magic and trailing checksum.

    The metadata sidecar is read when present; a bare binary file loads
    with unknown frequencies and empty metadata.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 4 + 8 + 8:
        raise ModelFormatError(f"{path}: file too short")
    if blob[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"{path}: bad magic")
    payload, stored = blob[:-8], blob[-8:]
    if checksum64(payload) != stored:
        raise ChecksumMismatch(f"{path}: checksum mismatch")
    buf = io.BytesIO(payload)
    buf.seek(len(MAGIC))
    dim, vocab_size = struct.unpack("<IQ", buf.read(12))
    words = []
    vectors = np.empty((vocab_size, dim), dtype=np.float32)
    row_bytes = dim * 4
    for i in range(vocab_size):
        raw_len = buf.read(2)
        if len(raw_len) != 2:
            raise ModelFormatError(f"{path}: truncated word record {i}")
        (word_len,) = struct.unpack("<H", raw_len)
        encoded = buf.read(word_len)
        row = buf.read(row_bytes)
        if len(encoded) != word_len or len(row) != row_bytes:
            raise ModelFormatError(f"{path}: truncated word record {i}")
        words.append(encoded.decode("utf-8"))
        vectors[i] = np.frombuffer(row, dtype="<f4")
    if buf.read(1):
        raise ModelFormatError(f"{path}: trailing bytes after word records")

    counts = None
    min_count = 0
    metadata = {}
    sidecar_path = _sidecar_path(path)
    if os.path.exists(sidecar_path):
        with open(sidecar_path, encoding="utf-8") as fh:
            sidecar = json.load(fh)
        counts = sidecar.get("counts")
        min_count = sidecar.get("min_count", 0)
        metadata = sidecar.get("metadata", {})
    vocab = Vocabulary(words, counts, min_count)
    return EmbeddingModel(dim, vocab, vectors, None, metadata)
