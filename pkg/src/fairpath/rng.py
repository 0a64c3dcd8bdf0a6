"""Deterministic random-stream derivation.

All stochastic code in the package draws from numpy PCG64 generators whose
seeds are derived from a user seed plus a path of labels. The splitting rule
is: ``SeedSequence([seed, key(p1), key(p2), ...])`` where string labels are
hashed with SHA-256 (first 8 bytes, little-endian) and integers are used
as-is. Two consequences worth relying on:

* streams are independent of evaluation order, so adding a new consumer
  (e.g. a new SCM column) never perturbs the draws of existing ones;
* the same (seed, path) always yields the same stream on any platform.
"""

import hashlib

import numpy as np

_U64 = 0xFFFFFFFFFFFFFFFF


def name_key(name: str) -> int:
    """Stable 64-bit key for a string label."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def seed_sequence(seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for ``(seed, *path)``; path entries are ints or strings."""
    entropy = [int(seed) & _U64]
    for part in path:
        if isinstance(part, str):
            entropy.append(name_key(part))
        else:
            entropy.append(int(part) & _U64)
    return np.random.SeedSequence(entropy)


def substream(seed: int, *path) -> np.random.Generator:
    """Independent PCG64 generator for ``(seed, *path)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))
