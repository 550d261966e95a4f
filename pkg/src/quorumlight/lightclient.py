"""Light-client state and update verification.

The client stores only its epoch, one trusted aggregated quorum key and
the last verified state digest. Verifying an update costs one pairing
term per static-quorum subperiod plus the header check, independent of
how many epochs the update covers. The sequential-verification baseline
(one pairing check per epoch) doubles as the ground-truth oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .chain import BlockHeader, Chain
from .codec import encode_epoch, encode_epoch_with_key
from .fullnode import UpdateProof
from .tms import EdgeMessage, GroupSignature, PublicKey, verify_message, verify_path


class RejectReason(Enum):
    MALFORMED = "malformed"
    CHAIN_SIG_FAIL = "chain_sig_fail"
    HEADER_SIG_FAIL = "header_sig_fail"
    STALE = "stale"


class UpdateRejected(Exception):
    def __init__(self, reason: RejectReason, detail: str = ""):
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)
        self.reason = reason


@dataclass(frozen=True)
class LightClientState:
    epoch: int
    trusted_key: PublicKey  # aggregated key of the current epoch's quorum
    state_digest: bytes
    height: int

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError("epoch must be >= 1")
        if len(self.state_digest) != 32:
            raise ValueError("state digest must be 32 bytes")
        if self.height < 0:
            raise ValueError("height must be >= 0")


def initial_state(chain: Chain, epoch: int = 1) -> LightClientState:
    """Trust-anchored state as provisioned out of band: the quorum key of
    the given epoch, with no state verified yet."""
    return LightClientState(
        epoch=epoch,
        trusted_key=chain.record(epoch).quorum.aggregated_key,
        state_digest=b"\x00" * 32,
        height=(epoch - 1) * chain.config.blocks_per_epoch,
    )


def make_query(state: LightClientState) -> int:
    return state.epoch


def _head_message(index: int, key: PublicKey | None) -> bytes:
    if key is None:
        return encode_epoch(index)
    return encode_epoch_with_key(index, key)


def verify_update(state: LightClientState, proof: UpdateProof) -> LightClientState:
    """Check a proof against the trusted key and return the advanced state.

    Raises UpdateRejected (reason MALFORMED / STALE / CHAIN_SIG_FAIL /
    HEADER_SIG_FAIL) without mutating anything on any failure.
    """
    breaks = proof.break_points
    ell = len(breaks)
    if ell < 1:
        raise UpdateRejected(RejectReason.MALFORMED, "no subperiods")
    if len(proof.next_keys) not in (ell, ell - 1):
        raise UpdateRejected(RejectReason.MALFORMED, "key slots inconsistent")
    if any(a >= b for a, b in zip(breaks, breaks[1:])):
        raise UpdateRejected(RejectReason.MALFORMED, "break points not increasing")
    if proof.header.epoch <= state.epoch:
        raise UpdateRejected(
            RejectReason.STALE, f"proof tip epoch {proof.header.epoch} <= {state.epoch}"
        )
    if breaks[0] < state.epoch:
        raise UpdateRejected(RejectReason.MALFORMED, "break point predates state")
    if proof.header.epoch != breaks[-1] + 1:
        raise UpdateRejected(RejectReason.MALFORMED, "header epoch mismatch")

    apks = [state.trusted_key, *proof.next_keys[: ell - 1]]
    edges = []
    prev = state.epoch - 1
    for k, j in enumerate(breaks):
        key = proof.next_keys[k] if k < len(proof.next_keys) else None
        edges.append(EdgeMessage(tail=encode_epoch(prev), head=_head_message(j, key)))
        prev = j
    if not verify_path(apks, edges, proof.signature):
        raise UpdateRejected(RejectReason.CHAIN_SIG_FAIL)

    final_key = proof.next_keys[-1] if proof.next_keys else state.trusted_key
    if not verify_message(final_key, proof.header.to_bytes(), proof.header_sig):
        raise UpdateRejected(RejectReason.HEADER_SIG_FAIL)

    return LightClientState(
        epoch=proof.header.epoch,
        trusted_key=final_key,
        state_digest=proof.header.state_digest,
        height=proof.header.height,
    )


# -- sequential-verification baseline (oracle) ----------------------------


@dataclass(frozen=True)
class SvEpochData:
    """One epoch's worth of the data the baseline checks in sequence."""

    index: int
    is_break_point: bool
    next_key: PublicKey
    quorum_signature: GroupSignature


class SvRejected(Exception):
    def __init__(self, epoch: int, detail: str = ""):
        super().__init__(f"sequential verification failed at epoch {epoch}: {detail}")
        self.epoch = epoch


def sv_verify(
    state: LightClientState,
    epochs: Iterable[SvEpochData],
    final_header: BlockHeader | None = None,
    final_header_sig: GroupSignature | None = None,
) -> LightClientState:
    """Verify every epoch in order with the key carried from the previous
    one, then the final header. With no epochs and no header, the state is
    returned unchanged."""
    key = state.trusted_key
    expected = state.epoch
    for data in epochs:
        if data.index != expected:
            raise SvRejected(data.index, "epochs out of order")
        head = _head_message(data.index, data.next_key if data.is_break_point else None)
        edge = EdgeMessage(tail=encode_epoch(data.index - 1), head=head)
        if not verify_path([key], [edge], data.quorum_signature):
            raise SvRejected(data.index, "epoch signature invalid")
        if data.is_break_point:
            key = data.next_key
        expected += 1
    if final_header is None:
        return LightClientState(
            epoch=expected,
            trusted_key=key,
            state_digest=state.state_digest,
            height=state.height,
        )
    if final_header.epoch != expected:
        raise SvRejected(expected, "final header epoch mismatch")
    if not verify_message(key, final_header.to_bytes(), final_header_sig):
        raise SvRejected(expected, "final header signature invalid")
    return LightClientState(
        epoch=final_header.epoch,
        trusted_key=key,
        state_digest=final_header.state_digest,
        height=final_header.height,
    )


def sv_epoch_stream(chain: Chain, e1: int, e2: int) -> list[SvEpochData]:
    """Per-epoch data for [e1, e2-1] as served to a baseline client."""
    out = []
    for i in range(e1, e2):
        record = chain.record(i)
        out.append(
            SvEpochData(
                index=i,
                is_break_point=record.is_break_point,
                next_key=record.next_key,
                quorum_signature=chain.quorum_signature(i),
            )
        )
    return out


def sv_sync(chain: Chain, state: LightClientState, to_epoch: int) -> LightClientState:
    """Run the baseline from a state to a target epoch of a chain."""
    if to_epoch < state.epoch:
        raise ValueError("target epoch predates state")
    if to_epoch > chain.tip_epoch:
        raise ValueError("target epoch beyond chain tip")
    if to_epoch == state.epoch:
        return sv_verify(state, [])
    return sv_verify(
        state,
        sv_epoch_stream(chain, state.epoch, to_epoch),
        chain.end_of_epoch_header(to_epoch),
        chain.header_signature(to_epoch),
    )
