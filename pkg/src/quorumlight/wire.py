"""Bit-exact wire encodings: update proofs, frames, client state file.

Decoding is structural only — lengths, the key-presence bitmap (every
slot but the last must be present), point canonicity. Whether a decoded
proof is *acceptable* is solely the light client's business.

Frames are length-prefixed: 4-byte big-endian length covering a 1-byte
kind plus the payload, capped at 16 MiB. All integers are big-endian.
"""

from __future__ import annotations

import struct

from .chain import BlockHeader
from .fullnode import UpdateProof
from .lightclient import LightClientState
from .tms import GroupSignature, PublicKey

KIND_QUERY = 0x01
KIND_PROOF = 0x02
KIND_ERROR = 0x03
_KINDS = (KIND_QUERY, KIND_PROOF, KIND_ERROR)

MAX_FRAME = 16 * 1024 * 1024

ERR_UNKNOWN_EPOCH = 0x01
ERR_INTERNAL = 0x02

STATE_MAGIC = b"QLLC0001"
STATE_FILE_SIZE = 8 + 8 + 8 + 48 + 32


class CorruptError(ValueError):
    """Structurally invalid wire bytes; no partial value is surfaced."""


# -- proofs ----------------------------------------------------------------


def proof_encoded_size(ell: int, final_key_present: bool) -> int:
    """Closed-form size of an encoded proof."""
    present = ell if final_key_present else ell - 1
    return 2 + 8 * ell + (ell + 7) // 8 + 48 * present + 96 + 48 + 96


def encode_proof(proof: UpdateProof) -> bytes:
    ell = len(proof.break_points)
    if ell >= 1 << 16:
        raise ValueError("too many subperiods for the wire format")
    out = bytearray()
    out += struct.pack(">H", ell)
    for j in proof.break_points:
        out += struct.pack(">Q", j)
    bitmap = bytearray((ell + 7) // 8)
    for k in range(len(proof.next_keys)):
        bitmap[k >> 3] |= 1 << (7 - (k & 7))
    out += bitmap
    for key in proof.next_keys:
        out += key.to_bytes()
    out += proof.signature.to_bytes()
    out += proof.header.to_bytes()
    out += proof.header_sig.to_bytes()
    return bytes(out)


def decode_proof(data: bytes) -> UpdateProof:
    view = memoryview(data)
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(view):
            raise CorruptError("truncated proof")
        chunk = bytes(view[pos : pos + n])
        pos += n
        return chunk

    (ell,) = struct.unpack(">H", take(2))
    if ell < 1:
        raise CorruptError("proof must cover at least one subperiod")
    breaks = tuple(struct.unpack(">Q", take(8))[0] for _ in range(ell))
    bitmap = take((ell + 7) // 8)
    present = []
    for k in range(ell):
        present.append(bool(bitmap[k >> 3] & (1 << (7 - (k & 7)))))
    for k in range(ell - 1):
        if not present[k]:
            raise CorruptError("only the final key slot may be absent")
    for k in range(ell, 8 * len(bitmap)):
        if bitmap[k >> 3] & (1 << (7 - (k & 7))):
            raise CorruptError("bitmap has bits past the last slot")
    try:
        next_keys = tuple(PublicKey.from_bytes(take(48)) for p in present if p)
        signature = GroupSignature.from_bytes(take(96))
        header = BlockHeader.from_bytes(take(48))
        header_sig = GroupSignature.from_bytes(take(96))
    except ValueError as exc:
        if isinstance(exc, CorruptError):
            raise
        raise CorruptError(f"bad field encoding: {exc}") from None
    if pos != len(view):
        raise CorruptError("trailing bytes after proof")
    return UpdateProof(
        break_points=breaks,
        next_keys=next_keys,
        signature=signature,
        header=header,
        header_sig=header_sig,
    )


# -- queries / errors -------------------------------------------------------


def encode_query(epoch: int) -> bytes:
    if not 0 <= epoch < 1 << 64:
        raise ValueError("epoch out of range")
    return struct.pack(">Q", epoch)


def decode_query(data: bytes) -> int:
    if len(data) != 8:
        raise CorruptError("query payload must be 8 bytes")
    return struct.unpack(">Q", data)[0]


def encode_error(code: int, message: str) -> bytes:
    return bytes([code]) + message.encode("utf-8")


def decode_error(data: bytes) -> tuple[int, str]:
    if len(data) < 1:
        raise CorruptError("empty error payload")
    return data[0], data[1:].decode("utf-8", errors="replace")


# -- frames ------------------------------------------------------------------


def encode_frame(kind: int, payload: bytes) -> bytes:
    if kind not in _KINDS:
        raise ValueError(f"unknown frame kind {kind}")
    length = 1 + len(payload)
    if length > MAX_FRAME:
        raise ValueError("frame exceeds 16 MiB cap")
    return struct.pack(">I", length) + bytes([kind]) + payload


def decode_frame_length(header: bytes) -> int:
    """Total kind+payload length from the 4-byte prefix."""
    if len(header) != 4:
        raise CorruptError("short frame header")
    (length,) = struct.unpack(">I", header)
    if not 1 <= length <= MAX_FRAME:
        raise CorruptError("frame length out of bounds")
    return length


def split_frame(body: bytes) -> tuple[int, bytes]:
    """Split a frame body (kind byte + payload) read off the wire."""
    if not body:
        raise CorruptError("empty frame body")
    kind = body[0]
    if kind not in _KINDS:
        raise CorruptError(f"unknown frame kind {kind}")
    return kind, body[1:]


# -- client state file --------------------------------------------------------


def encode_client_state(state: LightClientState) -> bytes:
    return (
        STATE_MAGIC
        + struct.pack(">QQ", state.epoch, state.height)
        + state.trusted_key.to_bytes()
        + state.state_digest
    )


def decode_client_state(data: bytes) -> LightClientState:
    if len(data) != STATE_FILE_SIZE:
        raise CorruptError("client state file has wrong size")
    if data[:8] != STATE_MAGIC:
        raise CorruptError("not a client state file (bad magic)")
    epoch, height = struct.unpack(">QQ", data[8:24])
    try:
        key = PublicKey.from_bytes(data[24:72])
        return LightClientState(
            epoch=epoch,
            trusted_key=key,
            state_digest=data[72:104],
            height=height,
        )
    except ValueError as exc:
        raise CorruptError(f"bad client state: {exc}") from None


def save_client_state(path, state: LightClientState) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_client_state(state))


def load_client_state(path) -> LightClientState:
    with open(path, "rb") as fh:
        return decode_client_state(fh.read())
