"""Deterministic named RNG substreams.

All randomness in a run flows from one root seed; independent consumers get
generators derived from (seed, *tokens) via a stable hash, so adding or
reordering consumers cannot silently shift another consumer's stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, *tokens) -> np.random.Generator:
    digest = hashlib.sha256(repr((int(seed), tokens)).encode()).digest()
    entropy = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 32, 4)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def hash64(*tokens) -> int:
    """Stable 64-bit hash, used to key counter-based generators."""
    digest = hashlib.blake2b(repr(tokens).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")
