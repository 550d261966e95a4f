"""BLS12-381 backend: group handles, hash-to-group, pairings, op counters.

Thin wrapper over the native extension. Points in the key group (G1)
compress to 48 bytes, points in the signature group (G2) to 96 bytes.
All pairing checks go through :func:`pairing_product_is_one` so that the
number of pairing evaluations can be instrumented.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from functools import lru_cache

from . import _blsops

# Order of the prime-order subgroup (scalar field modulus).
GROUP_ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

G1_BYTES = 48
G2_BYTES = 96

G1Point = _blsops.G1Elem
G2Point = _blsops.G2Elem

_G1_GEN = G1Point.generator()
_G2_GEN = G2Point.generator()
_G1_GEN_NEG = _G1_GEN.neg()


class _Counters(threading.local):
    def __init__(self):
        self.pairings = 0
        self.g2_hashes = 0


_counters = _Counters()


class OpCount:
    """Snapshot of backend operation counts observed inside a measure() block."""

    def __init__(self):
        self.pairings = 0
        self.g2_hashes = 0


@contextmanager
def measure():
    """Count pairing evaluations and hash-to-group evaluations in this thread."""
    start = (_counters.pairings, _counters.g2_hashes)
    out = OpCount()
    try:
        yield out
    finally:
        out.pairings = _counters.pairings - start[0]
        out.g2_hashes = _counters.g2_hashes - start[1]


def g1_generator() -> G1Point:
    return _G1_GEN


def g2_generator() -> G2Point:
    return _G2_GEN


def _scalar_bytes(k: int) -> bytes:
    return (k % GROUP_ORDER).to_bytes(32, "little")


def g1_mul(point: G1Point, k: int) -> G1Point:
    return point.mul(_scalar_bytes(k))


def g2_mul(point: G2Point, k: int) -> G2Point:
    return point.mul(_scalar_bytes(k))


def g1_sum(points) -> G1Point:
    points = list(points)
    if not points:
        return G1Point.identity()
    return G1Point.sum(points)


def g2_sum(points) -> G2Point:
    points = list(points)
    if not points:
        return G2Point.identity()
    return G2Point.sum(points)


@lru_cache(maxsize=1 << 17)
def hash_to_g2(msg: bytes, dst: bytes) -> G2Point:
    """Hash a message into the signature group under a domain tag (cached)."""
    _counters.g2_hashes += 1
    return _blsops.hash_to_g2(msg, dst)


def pairing_product_is_one(pairs) -> bool:
    """Check prod e(a_i, b_i) == 1; counts len(pairs) pairing evaluations."""
    pairs = list(pairs)
    _counters.pairings += len(pairs)
    return _blsops.pairing_product_is_identity(pairs)


def g1_generator_neg() -> G1Point:
    return _G1_GEN_NEG
