"""Keyed, counter-based random streams.

Every stream is a numpy ``Philox`` generator whose 128-bit key is a BLAKE2b
digest of the run seed and a tuple of labels. Streams for different labels
are independent and can be derived in any order or process.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_MASK = (1 << 64) - 1


def stream_key(seed: int, *labels: object) -> np.ndarray:
    if not 0 <= int(seed) <= _SEED_MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    h = hashlib.blake2b(digest_size=16, person=b"benford-scan")
    h.update(int(seed).to_bytes(8, "little"))
    for label in labels:
        raw = str(label).encode("utf-8")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
    return np.frombuffer(h.digest(), dtype="<u8").astype(np.uint64)


def stream(seed: int, *labels: object) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *labels)``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))
