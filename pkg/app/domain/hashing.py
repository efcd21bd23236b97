"""
Seeded 64-bit hashing shared by both hosts.

mix64 is the SplitMix64 output function (golden-gamma increment followed by
the 30/27/31 xor-shift-multiply finaliser). An element e with seed s hashes
on attempt a to

    element_hash(e, s, a) = mix64(mix64(s) XOR ((a << 32) | e))

and its cell index is element_hash mod b. Attempts continue until k distinct
indices are found. The numpy variant wraps on uint64 exactly like the scalar
one and is used where whole ranges of elements are hashed at once.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MUL_1 = 0xBF58476D1CE4E5B9
MIX_MUL_2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * MIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MUL_2) & MASK64
    return z ^ (z >> 31)


def element_hash(e: int, seed: int, attempt: int) -> int:
    return mix64(mix64(seed & MASK64) ^ (((attempt << 32) | e) & MASK64))


def mix64_array(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z += np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_MUL_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_MUL_2)
    return z ^ (z >> np.uint64(31))


def element_hash_array(elements: np.ndarray, seed: int, attempt: int) -> np.ndarray:
    keyed = (np.uint64(attempt) << np.uint64(32)) | elements.astype(np.uint64)
    return mix64_array(np.uint64(mix64(seed & MASK64)) ^ keyed)


def derive_seed(base: int, *labels: int) -> int:
    """Fold integer labels into a base seed (used for per-trial seeds)."""
    h = mix64(base & MASK64)
    for label in labels:
        h = mix64(h ^ (label & MASK64))
    return h
