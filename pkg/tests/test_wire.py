"""Wire encodings: exact layout, roundtrips, structural rejection."""

import pytest

from quorumlight import wire
from quorumlight.fullnode import SignatureStore, build_proof
from quorumlight.lightclient import initial_state
from quorumlight.wire import (
    CorruptError,
    decode_client_state,
    decode_error,
    decode_frame_length,
    decode_proof,
    decode_query,
    encode_client_state,
    encode_error,
    encode_frame,
    encode_proof,
    encode_query,
    load_client_state,
    proof_encoded_size,
    save_client_state,
    split_frame,
)


@pytest.fixture(scope="module")
def stores(mid_chain, static_chain):
    return SignatureStore(mid_chain), SignatureStore(static_chain)


def test_proof_roundtrip_many(stores, mid_chain, rnd):
    store, _ = stores
    for e1 in rnd.sample(range(1, mid_chain.tip_epoch), 25):
        proof = build_proof(store, e1)
        data = encode_proof(proof)
        assert decode_proof(data) == proof
        assert len(data) == proof_encoded_size(
            len(proof.break_points), proof.final_key_present
        )


def test_single_period_layout(stores, static_chain):
    _, store = stores
    proof = build_proof(store, 1)
    data = encode_proof(proof)
    # count(2) | break point(8) | bitmap(1) | S(96) | header(48) | sig(96)
    assert not proof.final_key_present
    assert len(data) == 2 + 8 + 1 + 96 + 48 + 96
    assert data[:2] == (1).to_bytes(2, "big")
    assert data[2:10] == (static_chain.tip_epoch - 1).to_bytes(8, "big")
    assert data[10] == 0x00  # final slot absent


def test_full_period_unit_is_152_bytes_plus_bookkeeping(mid_chain):
    from .test_fullnode import _truncated

    store = SignatureStore(_truncated(mid_chain, mid_chain.config.period_length + 1))
    proof = build_proof(store, 2)
    assert proof.final_key_present
    data = encode_proof(proof)
    # 152-byte period unit + 2 count bytes + 1 bitmap byte, then header fields
    assert len(data) - (48 + 96) == 152 + 2 + 1
    assert proof.chain_payload_bytes() == 152


def test_decode_rejects_truncation_and_trailing(stores):
    store, _ = stores
    data = encode_proof(build_proof(store, 5))
    for cut in (0, 1, 10, len(data) - 1):
        with pytest.raises(CorruptError):
            decode_proof(data[:cut])
    with pytest.raises(CorruptError):
        decode_proof(data + b"\x00")


def test_decode_rejects_zero_subperiods():
    with pytest.raises(CorruptError):
        decode_proof(b"\x00\x00")


def test_decode_rejects_bitmap_violations(stores, mid_chain):
    store, _ = stores
    proof = build_proof(store, 2)
    ell = len(proof.break_points)
    assert ell >= 2
    data = bytearray(encode_proof(proof))
    bitmap_at = 2 + 8 * ell
    # clear the first presence bit: a non-final absent slot
    broken = bytearray(data)
    broken[bitmap_at] &= 0x7F
    with pytest.raises(CorruptError):
        decode_proof(bytes(broken))
    # set a bit past the last slot
    broken = bytearray(data)
    broken[bitmap_at] |= 1 << (7 - ell)
    with pytest.raises(CorruptError):
        decode_proof(bytes(broken))


def test_decode_rejects_bad_points(stores):
    store, _ = stores
    proof = build_proof(store, 2)
    ell = len(proof.break_points)
    data = bytearray(encode_proof(proof))
    key_at = 2 + 8 * ell + (ell + 7) // 8
    data[key_at : key_at + 48] = b"\xff" * 48
    with pytest.raises(CorruptError):
        decode_proof(bytes(data))


def test_query_roundtrip():
    payload = encode_query(7)
    assert len(payload) == 8
    assert decode_query(payload) == 7
    with pytest.raises(CorruptError):
        decode_query(b"\x00" * 7)
    with pytest.raises(CorruptError):
        decode_query(b"\x00" * 9)


def test_error_roundtrip():
    payload = encode_error(wire.ERR_UNKNOWN_EPOCH, "epoch 99 unknown")
    assert decode_error(payload) == (wire.ERR_UNKNOWN_EPOCH, "epoch 99 unknown")
    with pytest.raises(CorruptError):
        decode_error(b"")


def test_frame_layout_and_bounds():
    frame = encode_frame(wire.KIND_QUERY, encode_query(3))
    assert len(frame) == 4 + 1 + 8
    assert frame[:4] == (9).to_bytes(4, "big")
    assert frame[4] == wire.KIND_QUERY
    assert decode_frame_length(frame[:4]) == 9
    assert split_frame(frame[4:]) == (wire.KIND_QUERY, encode_query(3))

    with pytest.raises(ValueError):
        encode_frame(0x7F, b"")
    with pytest.raises(ValueError):
        encode_frame(wire.KIND_PROOF, b"\x00" * wire.MAX_FRAME)
    with pytest.raises(CorruptError):
        decode_frame_length((0).to_bytes(4, "big"))
    with pytest.raises(CorruptError):
        decode_frame_length((wire.MAX_FRAME + 1).to_bytes(4, "big"))
    with pytest.raises(CorruptError):
        split_frame(b"\x7f" + b"x")


def test_client_state_file_roundtrip(small_chain, tmp_path):
    state = initial_state(small_chain, 5)
    data = encode_client_state(state)
    assert len(data) == wire.STATE_FILE_SIZE
    assert data[:8] == wire.STATE_MAGIC
    assert decode_client_state(data) == state

    path = tmp_path / "client.state"
    save_client_state(path, state)
    assert load_client_state(path) == state


def test_client_state_file_rejects_corruption(small_chain):
    state = initial_state(small_chain, 5)
    data = encode_client_state(state)
    with pytest.raises(CorruptError):
        decode_client_state(data[:-1])
    with pytest.raises(CorruptError):
        decode_client_state(b"BADMAGIC" + data[8:])
    broken = bytearray(data)
    broken[24:72] = bytes([0xC0]) + bytes(47)  # identity key
    with pytest.raises(CorruptError):
        decode_client_state(bytes(broken))
