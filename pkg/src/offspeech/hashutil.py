"""Stable keyed hashing used for sampling, checksums, and seed derivation.

Everything here must be platform- and run-independent: no use of Python's
salted ``hash()``.
"""

from __future__ import annotations

import hashlib

_U64 = 2**64


def _seed_key(seed: int) -> bytes:
    return (seed % _U64).to_bytes(8, "little")


def keyed_u64(data: bytes, seed: int) -> int:
    """64-bit keyed hash of ``data``, stable across runs and platforms."""
    h = hashlib.blake2b(data, digest_size=8, key=_seed_key(seed))
    return int.from_bytes(h.digest(), "little")


def unit_interval(data: bytes, seed: int) -> float:
    """Map ``data`` to a deterministic float in [0, 1)."""
    return keyed_u64(data, seed) / _U64


def derive_seed(master_seed: int, stage: str) -> int:
    """Per-stage 64-bit seed derived from the master seed.

    Derivation: blake2b(stage_name, key=little_endian_u64(master_seed)).
    """
    return keyed_u64(stage.encode("utf-8"), master_seed)


def checksum64(data: bytes) -> bytes:
    """8-byte content checksum used by the binary model formats."""
    return hashlib.blake2b(data, digest_size=8).digest()


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
