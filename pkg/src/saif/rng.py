"""Keyed counter-based random streams.

Every random draw in the pipeline comes from a Philox generator keyed
by (seed, image id, purpose level, extra path ints), so any component
can be recomputed in isolation without replaying a global stream.
Image ids enter as a 64-bit blake2b digest to keep keys integral.
"""

from __future__ import annotations

import hashlib

import numpy as np

LEVEL_PROMPT = 0   # harness-level prompt derivation (box noise)
LEVEL_OUTER = 1    # outer candidate jitter, path (i, LEVEL_OUTER)
LEVEL_INNER = 2    # inner jitter stream, path (i, LEVEL_INNER)
LEVEL_SCENE = 3    # synthetic scene shape parameters
LEVEL_NOISE = 4    # synthetic per-box noise field

_MASK64 = (1 << 64) - 1


def _image_key(image_id: str) -> int:
    digest = hashlib.blake2b(image_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_stream(seed: int, image_id: str, *path) -> np.random.Generator:
    """Independent generator for one (seed, image, purpose) tuple."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64,
                                spawn_key=(_image_key(image_id),
                                           *[int(p) for p in path]))
    return np.random.Generator(np.random.Philox(ss))
