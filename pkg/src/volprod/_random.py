"""Seed derivation.

All randomness comes from an explicit integer seed plus a tuple of keys
(check name, trial index, worker index, ...). Keys are folded into the
``spawn_key`` of a :class:`numpy.random.SeedSequence`, and bits are drawn from
the counter-based Philox generator, so a (seed, keys) pair always reproduces
the same stream regardless of how work is scheduled.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    return zlib.crc32(str(key).encode("utf-8"))


def derive_seed_sequence(seed: int, *keys) -> np.random.SeedSequence:
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_key_to_int(k) for k in keys))


def make_rng(seed: int, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys) -> int:
    """A 63-bit integer seed derived from ``seed`` and ``keys``."""
    return int(derive_seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def sphere_points(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform points on the unit sphere via normalized Gaussian vectors."""
    z = rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
