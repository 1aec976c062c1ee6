"""Counter-based, splittable random streams.

Every random draw in the package comes from a Philox stream whose 128-bit
key is derived from ``(seed, domain, *path)`` by a splitmix64 chain. Philox
output is a pure function of (key, counter position), so a value at entry
index i of a stream depends only on the key tuple and i -- never on how many
other streams exist, in what order they were drawn from, or on thread
scheduling. Distinct path tuples give disjoint streams.
"""

from __future__ import annotations

import numpy as np

__all__ = ["MASK64", "splitmix64", "derive_key", "stream"]

MASK64 = (1 << 64) - 1

# Domain tags keep the package's stream families disjoint by construction.
DOMAIN_FACTOR = 1   # CP factor / TT core entries, path (component, mode)
DOMAIN_OFFSET = 2   # E2LSH quantization offsets, path (component,)
DOMAIN_NAIVE = 3    # dense baseline projection vectors, path (component,)
DOMAIN_DATA = 4     # test-data generation, caller-chosen path


def splitmix64(z: int) -> int:
    """One splitmix64 avalanche step (64-bit wraparound arithmetic)."""
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *path: int) -> int:
    """Fold (seed, *path) into one well-mixed 64-bit word."""
    h = splitmix64(seed & MASK64)
    for p in path:
        h = splitmix64(h ^ splitmix64(p & MASK64))
    return h


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox stream for the given key tuple.

    The 128-bit Philox key packs two differently-salted digests of
    (seed, *path), so distinct tuples collide only with negligible
    probability.
    """
    lo = derive_key(seed, *path, 0x5157)
    hi = derive_key(seed, *path, 0xA11CE)
    return np.random.Generator(np.random.Philox(key=(hi << 64) | lo))
