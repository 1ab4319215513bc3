"""Counter-based random streams.

Every variate is a pure function of ``(key, counter)``:

    u64(key, k) = splitmix64_mix(key + (k + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)
    uniform(key, k) = ((u64 >> 11) + 0.5) * 2**-53                      in (0, 1)
    normal(key, k) = Phi^-1(uniform(key, k))

so streams are reproducible across processes, platforms and languages, and
any slice of a stream can be generated without producing its prefix.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.special import ndtri

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def derive_key(*parts: object) -> int:
    """Hash an arbitrary tuple of labels into a 64-bit stream key."""
    text = "\x1f".join(repr(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def raw_u64(key: int, start: int, n: int) -> np.ndarray:
    k = np.arange(start + 1, start + 1 + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key & 0xFFFFFFFFFFFFFFFF) + k * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(key: int, start: int, n: int) -> np.ndarray:
    """``n`` uniforms on the open unit interval, counters ``start .. start+n-1``."""
    return ((raw_u64(key, start, n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normal(key: int, start: int, n: int) -> np.ndarray:
    return ndtri(uniform(key, start, n))


class NormalStream:
    """Sequential standard-normal draws; the counter advances with every draw."""

    def __init__(self, key: int):
        self.key = key
        self.counter = 0

    def draw(self, n: int) -> np.ndarray:
        z = standard_normal(self.key, self.counter, n)
        self.counter += n
        return z
