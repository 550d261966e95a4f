"""Client-side verification: acceptance of honest proofs, the four
rejection reasons, agreement with the sequential-verification oracle,
and constant verifier work."""

import dataclasses

import pytest

from quorumlight import bls
from quorumlight.chain import generate_chain, ChainConfig
from quorumlight.fullnode import SignatureStore, UpdateProof, build_proof
from quorumlight.lightclient import (
    LightClientState,
    RejectReason,
    SvRejected,
    UpdateRejected,
    initial_state,
    make_query,
    sv_epoch_stream,
    sv_sync,
    sv_verify,
    verify_update,
)
from quorumlight.tms import GroupSignature, aggregate, aggregate_keys

from .test_fullnode import _truncated


def reject_reason(state, proof) -> RejectReason:
    with pytest.raises(UpdateRejected) as err:
        verify_update(state, proof)
    return err.value.reason


def test_make_query_returns_epoch(small_chain):
    assert make_query(initial_state(small_chain, 7)) == 7
    assert make_query(initial_state(small_chain)) == 1


def test_honest_update_matches_sv_oracle(small_chain):
    state = initial_state(small_chain)
    proof = build_proof(SignatureStore(small_chain), 1)
    fast = verify_update(state, proof)
    slow = sv_sync(small_chain, state, small_chain.tip_epoch)
    assert (fast.epoch, fast.height, fast.state_digest) == (
        slow.epoch,
        slow.height,
        slow.state_digest,
    )
    assert fast.trusted_key == slow.trusted_key
    assert fast.epoch == small_chain.tip_epoch
    assert fast.state_digest == small_chain.end_of_epoch_header(
        small_chain.tip_epoch
    ).state_digest


def test_honest_updates_from_random_epochs(mid_chain, rnd):
    store = SignatureStore(mid_chain)
    for e1 in rnd.sample(range(1, mid_chain.tip_epoch), 8):
        state = initial_state(mid_chain, e1)
        fast = verify_update(state, build_proof(store, e1))
        slow = sv_sync(mid_chain, state, mid_chain.tip_epoch)
        assert fast == slow


def test_single_epoch_static_update_keeps_trusted_key(static_chain):
    e1 = static_chain.tip_epoch - 1
    state = initial_state(static_chain, e1)
    proof = build_proof(SignatureStore(static_chain), e1)
    assert len(proof.break_points) == 1
    assert not proof.final_key_present
    new = verify_update(state, proof)
    assert new.trusted_key == state.trusted_key
    assert new.epoch == e1 + 1


def test_stale_proof_rejected_and_state_kept(small_chain):
    store = SignatureStore(small_chain)
    proof = build_proof(store, 1)
    state = verify_update(initial_state(small_chain), proof)
    assert reject_reason(state, proof) == RejectReason.STALE
    # the state object used for the attempt is untouched
    assert state == verify_update(initial_state(small_chain), proof)


def test_malformed_rejections(small_chain):
    store = SignatureStore(small_chain)
    state = initial_state(small_chain, 3)
    proof = build_proof(store, 3)

    decreasing = dataclasses.replace(
        proof, break_points=tuple(reversed(proof.break_points))
    )
    if len(proof.break_points) > 1:
        assert reject_reason(state, decreasing) == RejectReason.MALFORMED

    # a proof whose first break point lies behind the client's epoch
    behind = initial_state(small_chain, 9)
    predates = build_proof(store, 1)
    assert predates.break_points[0] < behind.epoch
    assert reject_reason(behind, predates) == RejectReason.MALFORMED

    wrong_header = dataclasses.replace(
        proof, header=small_chain.end_of_epoch_header(small_chain.tip_epoch - 1)
    )
    assert reject_reason(state, wrong_header) in (
        RejectReason.MALFORMED,
        RejectReason.STALE,
    )


def test_substituted_quorum_key_rejected(mid_chain):
    """A full node colluding with non-quorum validators cannot swap in a
    key they control: the previous quorum never signed it."""
    store = SignatureStore(mid_chain)
    e1 = 2
    proof = build_proof(store, e1)
    assert len(proof.next_keys) >= 2
    record = mid_chain.record(proof.break_points[1])
    outsiders = [
        pk for v, pk in record.validators if v not in record.quorum.members
    ]
    assert outsiders, "need an epoch whose quorum excludes someone"
    fake_key = aggregate_keys(outsiders)
    for slot in range(len(proof.next_keys)):
        keys = list(proof.next_keys)
        keys[slot] = fake_key
        forged = dataclasses.replace(proof, next_keys=tuple(keys))
        state = initial_state(mid_chain, e1)
        assert reject_reason(state, forged) == RejectReason.CHAIN_SIG_FAIL


def test_omitted_subperiod_rejected(mid_chain):
    store = SignatureStore(mid_chain)
    e1 = 2
    proof = build_proof(store, e1)
    assert len(proof.break_points) >= 3
    forged = dataclasses.replace(
        proof,
        break_points=proof.break_points[:1] + proof.break_points[2:],
        next_keys=proof.next_keys[:1] + proof.next_keys[2:],
    )
    state = initial_state(mid_chain, e1)
    assert reject_reason(state, forged) in (
        RejectReason.CHAIN_SIG_FAIL,
        RejectReason.MALFORMED,
    )


def test_sub_quorum_aggregate_rejected(small_chain):
    """A signature set one member short of the quorum cannot satisfy the
    pairing equation for the full key product."""
    store = SignatureStore(_truncated(small_chain, 2))
    proof = build_proof(store, 1)
    record = small_chain.record(1)
    partial = aggregate(
        [record.signatures[v] for v in record.quorum.members[:-1]]
    )
    forged = dataclasses.replace(proof, signature=partial)
    state = initial_state(small_chain, 1)
    assert reject_reason(state, forged) == RejectReason.CHAIN_SIG_FAIL


def test_header_tampering_rejected(small_chain):
    store = SignatureStore(small_chain)
    proof = build_proof(store, 1)
    state = initial_state(small_chain)

    bad_sig = dataclasses.replace(
        proof, header_sig=GroupSignature(proof.header_sig.point.add(proof.header_sig.point))
    )
    assert reject_reason(state, bad_sig) == RejectReason.HEADER_SIG_FAIL

    bad_digest = dataclasses.replace(
        proof,
        header=dataclasses.replace(
            proof.header, state_digest=bytes(32)
        ),
    )
    assert reject_reason(state, bad_digest) == RejectReason.HEADER_SIG_FAIL


def test_pairing_count_depends_only_on_subperiod_count(static_chain):
    store = SignatureStore(static_chain)
    counts = set()
    for e1 in (1, 6, 12, static_chain.tip_epoch - 1):
        proof = build_proof(store, e1)
        assert len(proof.break_points) == 1
        state = initial_state(static_chain, e1)
        with bls.measure() as ops:
            verify_update(state, proof)
        counts.add(ops.pairings)
    # (ell + 1) chain pairings + 2 header pairings, independent of m
    assert counts == {4}


def test_pairing_count_scales_with_subperiods(mid_chain):
    store = SignatureStore(mid_chain)
    for e1 in (2, 45, 130):
        proof = build_proof(store, e1)
        ell = len(proof.break_points)
        state = initial_state(mid_chain, e1)
        with bls.measure() as ops:
            verify_update(state, proof)
        assert ops.pairings == ell + 3


def test_sv_rejects_forged_epoch_signature(small_chain):
    state = initial_state(small_chain)
    stream = sv_epoch_stream(small_chain, 1, small_chain.tip_epoch)
    victim = 5
    bad = dataclasses.replace(
        stream[victim - 1],
        quorum_signature=GroupSignature(stream[0].quorum_signature.point),
    )
    stream[victim - 1] = bad
    with pytest.raises(SvRejected) as err:
        sv_verify(
            state,
            stream,
            small_chain.end_of_epoch_header(small_chain.tip_epoch),
            small_chain.header_signature(small_chain.tip_epoch),
        )
    assert err.value.epoch == victim


def test_sv_zero_epochs_returns_state_unchanged(small_chain):
    state = initial_state(small_chain, 4)
    assert sv_sync(small_chain, state, 4) == state


def test_sv_rejects_out_of_order_stream(small_chain):
    state = initial_state(small_chain)
    stream = sv_epoch_stream(small_chain, 1, 6)
    stream.reverse()
    with pytest.raises(SvRejected):
        sv_verify(state, stream)


def test_state_validation():
    with pytest.raises(ValueError):
        LightClientState(
            epoch=0,
            trusted_key=None,  # never reached: epoch fails first
            state_digest=b"\x00" * 32,
            height=0,
        )
