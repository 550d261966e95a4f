"""Canonical byte encodings for epoch-related edge messages.

Two injective, tagged encodings: a bare epoch index, and an epoch index
paired with the aggregated key it announces. Validators sign the paired
form exactly when the upcoming quorum key changes.
"""

from __future__ import annotations

import struct

from .tms import EdgeMessage, PublicKey

_EPOCH_TAG = b"\x01"
_EPOCH_KEY_TAG = b"\x02"


def encode_epoch(index: int) -> bytes:
    if not 0 <= index < 1 << 64:
        raise ValueError("epoch index out of range")
    return _EPOCH_TAG + struct.pack(">Q", index)


def encode_epoch_with_key(index: int, key: PublicKey) -> bytes:
    if not 0 <= index < 1 << 64:
        raise ValueError("epoch index out of range")
    return _EPOCH_KEY_TAG + struct.pack(">Q", index) + key.to_bytes()


def epoch_edge(index: int, next_key: PublicKey | None = None) -> EdgeMessage:
    """Edge signed at the end of an epoch: tail is the previous index, the
    head carries the upcoming quorum key exactly at a break point."""
    if index < 1:
        raise ValueError("epoch index must be >= 1")
    tail = encode_epoch(index - 1)
    if next_key is None:
        return EdgeMessage(tail=tail, head=encode_epoch(index))
    return EdgeMessage(tail=tail, head=encode_epoch_with_key(index, next_key))
