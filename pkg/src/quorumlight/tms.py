"""Transitive multi-signature scheme over BLS12-381.

Keys live in the 48-byte key group, signatures in the 96-byte signature
group. An edge (x, y) is signed as the quotient of the two hashed
endpoints raised to the secret key, so signatures on consecutive edges
multiply into a signature on the combined edge: intermediate hash values
cancel. An aggregate over several signer sets and edge segments verifies
against one pairing product with one term per segment.

Three fixed domain tags keep edge signatures, header signatures and
proofs of possession mutually unusable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import bls

DST_EDGE = b"QL-EDGE-v1"
DST_HEADER = b"QL-HDR-v1"
DST_POP = b"QL-POP-v1"

PUBLIC_KEY_BYTES = bls.G1_BYTES
SIGNATURE_BYTES = bls.G2_BYTES


class DeterministicRng:
    """SHA-256 counter stream; yields an identical byte stream for a seed."""

    def __init__(self, seed: int | bytes):
        if isinstance(seed, int):
            seed = seed.to_bytes(8, "big")
        self._seed = bytes(seed)
        self._counter = 0
        self._buf = b""

    def randbytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = hashlib.sha256(
                self._seed + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out


class SecretKey:
    """Scalar in [1, group order)."""

    __slots__ = ("scalar",)

    def __init__(self, scalar: int):
        if not 1 <= scalar < bls.GROUP_ORDER:
            raise ValueError("secret key scalar out of range")
        self.scalar = scalar

    def public_key(self) -> "PublicKey":
        return PublicKey(bls.g1_mul(bls.g1_generator(), self.scalar))

    def __repr__(self):
        return "SecretKey(<hidden>)"


class PublicKey:
    """Key-group element; never the identity. Compresses to 48 bytes."""

    __slots__ = ("point", "_enc")

    def __init__(self, point):
        if point.is_identity():
            raise ValueError("public key must not be the identity")
        self.point = point
        self._enc = None

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicKey":
        return cls(bls.G1Point.from_compressed(data))

    def to_bytes(self) -> bytes:
        if self._enc is None:
            self._enc = self.point.to_compressed()
        return self._enc

    def __eq__(self, other):
        return isinstance(other, PublicKey) and self.point.equals(other.point)

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"PublicKey({self.to_bytes().hex()[:16]}...)"


class GroupSignature:
    """Signature-group element; the identity is a legal value (it is the
    signature on any degenerate edge (x, x)). Compresses to 96 bytes."""

    __slots__ = ("point", "_enc")

    def __init__(self, point):
        self.point = point
        self._enc = None

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupSignature":
        return cls(bls.G2Point.from_compressed(data))

    def to_bytes(self) -> bytes:
        if self._enc is None:
            self._enc = self.point.to_compressed()
        return self._enc

    def __eq__(self, other):
        return isinstance(other, GroupSignature) and self.point.equals(other.point)

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"GroupSignature({self.to_bytes().hex()[:16]}...)"


@dataclass(frozen=True)
class EdgeMessage:
    """Directed edge (tail -> head) over canonically encoded byte strings."""

    tail: bytes
    head: bytes


@dataclass(frozen=True)
class ProofOfPossession:
    sig: GroupSignature


def keygen(rng) -> tuple[SecretKey, PublicKey]:
    """Sample a keypair from a randomness source with .randbytes(n).

    Deterministic for a given rng stream; scalars outside [1, order) are
    rejection-sampled away.
    """
    while True:
        candidate = int.from_bytes(rng.randbytes(32), "big")
        if 1 <= candidate < bls.GROUP_ORDER:
            sk = SecretKey(candidate)
            return sk, sk.public_key()


def _edge_quotient(edge: EdgeMessage):
    head = bls.hash_to_g2(edge.head, DST_EDGE)
    tail = bls.hash_to_g2(edge.tail, DST_EDGE)
    return head.add(tail.neg())


def sign_edge(sk: SecretKey, edge: EdgeMessage) -> GroupSignature:
    """Sign an edge as (H(head) / H(tail))^sk."""
    return GroupSignature(bls.g2_mul(_edge_quotient(edge), sk.scalar))


def aggregate(sigs) -> GroupSignature:
    """Group product of signatures; order-independent. Empty input is an
    error so callers must handle the degenerate zero-segment case."""
    sigs = list(sigs)
    if not sigs:
        raise ValueError("cannot aggregate an empty signature list")
    return GroupSignature(bls.g2_sum(s.point for s in sigs))


def aggregate_keys(pks) -> PublicKey:
    """Group product of public keys (an aggregated public key)."""
    pks = list(pks)
    if not pks:
        raise ValueError("cannot aggregate an empty key list")
    return PublicKey(bls.g1_sum(pk.point for pk in pks))


def verify_path(apks, edges, signature: GroupSignature) -> bool:
    """Check e(g, S) == prod_i e(apk_i, H(head_i)/H(tail_i)).

    One pairing term per edge segment plus one for S, regardless of how
    many signatures were aggregated into S.
    """
    apks = list(apks)
    edges = list(edges)
    if len(apks) != len(edges):
        raise ValueError("need exactly one aggregated key per edge")
    if not edges:
        raise ValueError("need at least one edge")
    pairs = [(bls.g1_generator_neg(), signature.point)]
    for apk, edge in zip(apks, edges):
        pairs.append((apk.point, _edge_quotient(edge)))
    return bls.pairing_product_is_one(pairs)


def sign_message(sk: SecretKey, msg: bytes, dst: bytes = DST_HEADER) -> GroupSignature:
    """Plain multi-signature signing, H(msg)^sk, used for block headers."""
    return GroupSignature(bls.g2_mul(bls.hash_to_g2(msg, dst), sk.scalar))


def verify_message(
    apk: PublicKey, msg: bytes, sig: GroupSignature, dst: bytes = DST_HEADER
) -> bool:
    """Check e(g, sig) == e(apk, H(msg))."""
    return bls.pairing_product_is_one(
        [
            (bls.g1_generator_neg(), sig.point),
            (apk.point, bls.hash_to_g2(msg, dst)),
        ]
    )


def prove_possession(sk: SecretKey) -> ProofOfPossession:
    """Self-signature over the compressed public key, PoP domain tag."""
    pk = sk.public_key()
    return ProofOfPossession(sign_message(sk, pk.to_bytes(), dst=DST_POP))


def verify_possession(pk: PublicKey, pop: ProofOfPossession) -> bool:
    return verify_message(pk, pk.to_bytes(), pop.sig, dst=DST_POP)
