"""Deterministic random-stream management.

All randomness in a run flows from one 64-bit seed through numpy
``SeedSequence`` spawn keys. Streams are addressed by string labels plus
integer indices, e.g. ``("search", "eq", weight)``, so any phase of a
computation can be replayed in isolation and results never depend on
execution order or worker count.
"""

import hashlib

import numpy as np


def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        value = int(part)
        if value < 0:
            raise ValueError("stream key indices must be non-negative")
        return value
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(base, *key) -> np.random.SeedSequence:
    """Child SeedSequence of ``base`` addressed by a label/index tuple."""
    if isinstance(base, (int, np.integer)):
        base = np.random.SeedSequence(int(base))
    parts = tuple(_key_part(p) for p in key)
    return np.random.SeedSequence(
        entropy=base.entropy, spawn_key=tuple(base.spawn_key) + parts
    )


def generator(base, *key) -> np.random.Generator:
    """PCG64 generator for the addressed stream."""
    if key:
        base = substream(base, *key)
    elif isinstance(base, (int, np.integer)):
        base = np.random.SeedSequence(int(base))
    return np.random.Generator(np.random.PCG64(base))
