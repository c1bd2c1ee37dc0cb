"""Counter-based randomness and seed derivation.

Every random quantity attached to a lattice site (orientation draws,
coordinate streams, geometric jumps) is a pure function of a 64-bit key
and a tuple of integer counters, so a field can be evaluated in any order
and on any worker and still produce identical values.  Sequential draws
(walk steps, Brownian increments) use numpy generators whose seeds are
derived from ``(master_seed, purpose, index...)`` through
:class:`numpy.random.SeedSequence`.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = [
    "tag",
    "hash_keys",
    "uniform",
    "derive_seed",
    "make_rng",
    "seed_from_rng",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0**-53


def tag(name: str) -> int:
    """Stable integer code for a purpose string (independent of PYTHONHASHSEED)."""
    return zlib.crc32(name.encode("utf-8"))


def _as_u64(a) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype == np.uint64:
        return a
    # two's complement wrap so that negative lattice levels get distinct keys
    return np.asarray(a, dtype=np.int64).view(np.uint64)


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, in place on a private copy
    z = np.array(z, dtype=np.uint64)
    t = z >> _S30
    z ^= t
    z *= _M1
    np.right_shift(z, _S27, out=t)
    z ^= t
    z *= _M2
    np.right_shift(z, _S31, out=t)
    z ^= t
    return z


def hash_keys(seed, *counters) -> np.ndarray:
    """Hash ``seed`` and integer counters to uint64, broadcasting over arrays."""
    with np.errstate(over="ignore"):
        h = _mix(np.atleast_1d(_as_u64(seed)) + _GOLDEN)
        for c in counters:
            c = np.atleast_1d(_as_u64(c)) + _GOLDEN
            if c.size >= h.size:
                c ^= h
                h = _mix(c)
            else:
                h = _mix(h ^ c)
    return h


def uniform(seed, *counters) -> np.ndarray:
    """Uniform variates on [0, 1) keyed by ``(seed, *counters)``."""
    return (hash_keys(seed, *counters) >> _S11).astype(np.float64) * _TWO_M53


def derive_seed(master_seed: int, *keys: int | str) -> int:
    """Derive a 64-bit seed for a purpose/replica path below ``master_seed``."""
    spawn_key = tuple(tag(k) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(master_seed: int, *keys: int | str) -> np.random.Generator:
    """Independent :class:`numpy.random.Generator` for ``(master_seed, *keys)``."""
    return np.random.default_rng(derive_seed(master_seed, *keys))


def seed_from_rng(rng: np.random.Generator) -> int:
    """Draw a fresh 64-bit key from a sequential stream."""
    return int(rng.integers(0, 2**64, dtype=np.uint64))
