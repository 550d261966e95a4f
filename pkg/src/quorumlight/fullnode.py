"""Full-node proof construction.

Given a client's starting epoch, the node splits the covered range into
static-quorum subperiods at break points, multiplies together every
quorum member's end-of-epoch signature across the whole range, and ships
one aggregate plus the per-subperiod upcoming-quorum keys.

Three aggregation strategies produce byte-identical proofs: folding raw
per-validator signatures, per-epoch pre-aggregates, and 32-epoch window
pre-aggregates (windows are aligned to the start of each static-quorum
run and never cross a break point).
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field

from .bls import g2_sum
from .chain import BlockHeader, Chain, ChainConfig, EpochRecord, compute_header
from .tms import GroupSignature, PublicKey

STRATEGIES = ("none", "pre1", "pre32")
WINDOW = 32


class UnknownEpochError(ValueError):
    """Requested epoch outside the node's stored history."""


@dataclass(frozen=True)
class UpdateProof:
    """Everything a client needs to advance: break points, upcoming-quorum
    keys (the final slot is omitted when the closing epoch is not a break
    point), one aggregated signature, and the signed tip header."""

    break_points: tuple[int, ...]
    next_keys: tuple[PublicKey, ...]
    signature: GroupSignature
    header: BlockHeader
    header_sig: GroupSignature

    def __post_init__(self):
        ell = len(self.break_points)
        if ell < 1:
            raise ValueError("proof needs at least one subperiod")
        if len(self.next_keys) not in (ell, ell - 1):
            raise ValueError("need one key per break point (final may be absent)")

    @property
    def final_key_present(self) -> bool:
        return len(self.next_keys) == len(self.break_points)

    def chain_payload_bytes(self) -> int:
        """Bytes of (epoch numbers, keys, aggregated signature) — the
        per-period accounting unit, excluding framing and header."""
        return 8 * len(self.break_points) + 48 * len(self.next_keys) + 96


@dataclass
class BuildTrace:
    """Instrumentation for one proof build."""

    multiplications: int = 0  # group products performed while aggregating
    raw_signatures: int = 0
    pre1_segments: int = 0
    windows: int = 0


def group_multiplication_count(trace: BuildTrace) -> int:
    return trace.multiplications


class SignatureStore:
    """Per-epoch records plus optional pre-aggregates; one writer may
    append epochs while readers build proofs against a fixed tip."""

    def __init__(self, chain: Chain, strategy: str = "none"):
        if strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        self.config: ChainConfig = chain.config
        self.strategy = strategy
        self._lock = threading.Lock()
        self._records: list[EpochRecord] = []
        self._breaks: list[int] = []
        self._pre1: dict[int, GroupSignature] = {}
        self._pre32: dict[int, GroupSignature] = {}
        self._header_sigs: dict[int, GroupSignature] = {}
        for epoch in range(1, chain.tip_epoch + 1):
            self._extend(chain.record(epoch))
        self._header_sigs[chain.tip_epoch] = chain.header_signature(chain.tip_epoch)

    @property
    def tip_epoch(self) -> int:
        return len(self._records)

    def record(self, epoch: int) -> EpochRecord:
        if not 1 <= epoch <= self.tip_epoch:
            raise UnknownEpochError(f"epoch {epoch} outside stored history")
        return self._records[epoch - 1]

    def append(self, record: EpochRecord, header_sig: GroupSignature) -> None:
        """Extend the chain by one epoch; pre-aggregates update incrementally."""
        with self._lock:
            if record.index != self.tip_epoch + 1:
                raise ValueError("records must be appended in order")
            self._extend(record)
            self._header_sigs[record.index] = header_sig

    def _extend(self, record: EpochRecord) -> None:
        self._records.append(record)
        i = record.index
        if record.is_break_point:
            self._breaks.append(i)
        if self.strategy == "none":
            return
        self._pre1[i] = GroupSignature(
            g2_sum(record.signatures[v].point for v in record.quorum.members)
        )
        if self.strategy == "pre32":
            start = self._run_start(i)
            if (i - start + 1) % WINDOW == 0:
                w = i - WINDOW + 1
                self._pre32[w] = GroupSignature(
                    g2_sum(self._pre1[j].point for j in range(w, i + 1))
                )

    def _run_start(self, epoch: int) -> int:
        from bisect import bisect_left

        pos = bisect_left(self._breaks, epoch)
        return self._breaks[pos - 1] + 1 if pos > 0 else 1

    # -- proof construction ------------------------------------------------

    def find_break_points(self, e1: int, e2: int) -> list[int]:
        """Interior break points in [e1, e2-2] plus the closing index e2-1."""
        if e1 > e2:
            raise ValueError("start epoch must not exceed end epoch")
        if e1 < 1 or e2 > self.tip_epoch:
            raise UnknownEpochError(f"range [{e1}, {e2}] outside stored history")
        if e2 - e1 < 1:
            raise ValueError("update must cover at least one epoch boundary")
        interior = [
            i for i in range(e1, e2 - 1) if self._records[i - 1].is_break_point
        ]
        return interior + [e2 - 1]

    def _segment_factors(self, a: int, b: int, trace: BuildTrace):
        """Signature factors covering epochs [a, b] under the active strategy."""
        factors = []
        if self.strategy == "none":
            for i in range(a, b + 1):
                record = self._records[i - 1]
                for v in record.quorum.members:
                    factors.append(record.signatures[v].point)
                    trace.raw_signatures += 1
            return factors
        i = a
        while i <= b:
            if (
                self.strategy == "pre32"
                and (i - self._run_start(i)) % WINDOW == 0
                and i + WINDOW - 1 <= b
                and i in self._pre32
            ):
                factors.append(self._pre32[i].point)
                trace.windows += 1
                i += WINDOW
            else:
                factors.append(self._pre1[i].point)
                trace.pre1_segments += 1
                i += 1
        return factors

    def build_proof_with_trace(self, e1: int) -> tuple[UpdateProof, BuildTrace]:
        with self._lock:
            e2 = self.tip_epoch
        if e1 < 1 or e1 > e2:
            raise UnknownEpochError(f"epoch {e1} outside stored history")
        if e1 == e2:
            raise ValueError("client is already at the current epoch")
        breaks = self.find_break_points(e1, e2)
        trace = BuildTrace()
        factors = []
        prev = e1 - 1
        for j in breaks:
            factors.extend(self._segment_factors(prev + 1, j, trace))
            prev = j
        trace.multiplications = len(factors) - 1
        signature = GroupSignature(g2_sum(factors))
        next_keys = [self._records[j - 1].next_key for j in breaks]
        if not self._records[breaks[-1] - 1].is_break_point:
            next_keys = next_keys[:-1]
        header = compute_header(self.config, e2 * self.config.blocks_per_epoch)
        return (
            UpdateProof(
                break_points=tuple(breaks),
                next_keys=tuple(next_keys),
                signature=signature,
                header=header,
                header_sig=self._header_sigs[e2],
            ),
            trace,
        )

    def build_proof(self, e1: int) -> UpdateProof:
        proof, _ = self.build_proof_with_trace(e1)
        return proof


def find_break_points(store: SignatureStore, e1: int, e2: int) -> list[int]:
    return store.find_break_points(e1, e2)


def build_proof(store: SignatureStore, e1: int) -> UpdateProof:
    return store.build_proof(e1)
