"""Synthetic committee-based chain with per-epoch quorum tracking.

Each epoch has a validator set; at fixed period boundaries a configured
number of validators is rotated out. The running quorum of an epoch is
the largest validator subset (of size >= t) whose minimum consecutive
tenure is maximal. Every epoch's upcoming-quorum key is the aggregated
key of the next epoch's running quorum; epochs where that key changes
are break points and carry the key inside the signed edge message.

Chains serialize to a binary file (magic ``QLCHAIN1``) so full nodes and
benchmarks can reuse them without regeneration.
"""

from __future__ import annotations

import hashlib
import struct
from bisect import bisect_left
from dataclasses import dataclass, field
from io import BufferedIOBase, BytesIO
from pathlib import Path

from . import tms
from .codec import epoch_edge
from .tms import (
    DeterministicRng,
    GroupSignature,
    PublicKey,
    SecretKey,
    aggregate,
    aggregate_keys,
    keygen,
    sign_edge,
    sign_message,
)

CHAIN_MAGIC = b"QLCHAIN1"

ValidatorId = bytes  # opaque 32-byte identifier bound to one public key


def validator_id(pk: PublicKey) -> ValidatorId:
    return hashlib.sha256(pk.to_bytes()).digest()


@dataclass(frozen=True)
class ChainConfig:
    n: int
    t: int
    epochs: int
    period_length: int
    churn_per_period: int
    seed: int
    blocks_per_epoch: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("committee size must be >= 1")
        if not 1 <= self.t <= self.n:
            raise ValueError("quorum threshold must satisfy 1 <= t <= n")
        if self.epochs < 1:
            raise ValueError("need at least one epoch")
        if self.period_length < 1:
            raise ValueError("period length must be >= 1")
        if not 0 <= self.churn_per_period <= self.n - self.t:
            raise ValueError("churn must satisfy 0 <= churn <= n - t")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 bits")
        if self.blocks_per_epoch < 1:
            raise ValueError("blocks per epoch must be >= 1")


@dataclass(frozen=True)
class QuorumDescriptor:
    members: tuple[ValidatorId, ...]  # sorted
    aggregated_key: PublicKey
    tenure: int


@dataclass(frozen=True)
class EpochRecord:
    index: int
    validators: tuple[tuple[ValidatorId, PublicKey], ...]  # sorted by id
    tenures: dict[ValidatorId, int]
    quorum: QuorumDescriptor
    next_key: PublicKey
    is_break_point: bool
    signatures: dict[ValidatorId, GroupSignature]

    def validator_keys(self) -> dict[ValidatorId, PublicKey]:
        return dict(self.validators)


@dataclass(frozen=True)
class BlockHeader:
    height: int
    epoch: int
    state_digest: bytes

    ENCODED_SIZE = 48

    def to_bytes(self) -> bytes:
        return struct.pack(">QQ", self.height, self.epoch) + self.state_digest

    @classmethod
    def from_bytes(cls, data: bytes) -> "BlockHeader":
        if len(data) != cls.ENCODED_SIZE:
            raise ValueError("block header must be 48 bytes")
        height, epoch = struct.unpack(">QQ", data[:16])
        return cls(height=height, epoch=epoch, state_digest=data[16:])


def compute_header(config: ChainConfig, height: int) -> BlockHeader:
    """Deterministic header for a height: the state digest stands in for a
    real state machine and binds (height, epoch, chain seed)."""
    if height < 1:
        raise ValueError("height must be >= 1")
    epoch = (height - 1) // config.blocks_per_epoch + 1
    digest = hashlib.sha256(struct.pack(">QQQ", height, epoch, config.seed)).digest()
    return BlockHeader(height=height, epoch=epoch, state_digest=digest)


def longest_running_quorum(tenures, pks, t: int) -> QuorumDescriptor:
    """All validators at or above the largest tenure bar clearable by >= t
    of them. Deterministic; maximal membership at the chosen bar."""
    if t < 1:
        raise ValueError("quorum threshold must be >= 1")
    if len(tenures) < t:
        raise ValueError(f"need at least {t} validators, have {len(tenures)}")
    bar = sorted(tenures.values(), reverse=True)[t - 1]
    members = tuple(sorted(v for v, tenure in tenures.items() if tenure >= bar))
    key = aggregate_keys(pks[v] for v in members)
    return QuorumDescriptor(members=members, aggregated_key=key, tenure=bar)


def epoch_sign(
    sk: SecretKey,
    index: int,
    is_break_point: bool,
    next_key: PublicKey | None = None,
) -> GroupSignature:
    """End-of-epoch edge signature; the upcoming quorum key is embedded in
    the signed message exactly at break points."""
    if is_break_point and next_key is None:
        raise ValueError("break-point signature needs the upcoming quorum key")
    if not is_break_point and next_key is not None:
        raise ValueError("non-break-point signature must not carry a key")
    return sign_edge(sk, epoch_edge(index, next_key))


def sign_header(secret_keys, header: BlockHeader) -> GroupSignature:
    """Aggregate of the given signers' header-domain signatures."""
    return aggregate(sign_message(sk, header.to_bytes()) for sk in secret_keys)


class Chain:
    """Immutable generated or loaded chain: per-epoch records, headers and
    their quorum signatures. Secret keys are present only on generated
    chains and are never serialized."""

    def __init__(
        self,
        config: ChainConfig,
        records: list[EpochRecord],
        secret_keys: dict[ValidatorId, SecretKey] | None = None,
        header_sigs: dict[int, GroupSignature] | None = None,
    ):
        if len(records) != config.epochs:
            raise ValueError("record count does not match config")
        self.config = config
        self._records = records
        self.secret_keys = secret_keys
        self._header_sigs = dict(header_sigs or {})
        self._breaks = tuple(r.index for r in records if r.is_break_point)

    @property
    def tip_epoch(self) -> int:
        return self.config.epochs

    @property
    def genesis_key(self) -> PublicKey:
        """Aggregated key of epoch 1's quorum: the trust anchor a client
        initialized at epoch 1 starts from."""
        return self._records[0].quorum.aggregated_key

    def record(self, epoch: int) -> EpochRecord:
        if not 1 <= epoch <= self.tip_epoch:
            raise ValueError(f"epoch {epoch} outside [1, {self.tip_epoch}]")
        return self._records[epoch - 1]

    @property
    def break_points(self) -> tuple[int, ...]:
        return self._breaks

    def run_start(self, epoch: int) -> int:
        """First epoch of the static-quorum run containing this epoch.
        Runs end at break points: each run is (previous bp, bp]."""
        self.record(epoch)
        pos = bisect_left(self._breaks, epoch)
        return self._breaks[pos - 1] + 1 if pos > 0 else 1

    def epoch_of_height(self, height: int) -> int:
        return (height - 1) // self.config.blocks_per_epoch + 1

    def make_header(self, height: int) -> BlockHeader:
        max_height = self.tip_epoch * self.config.blocks_per_epoch
        if not 1 <= height <= max_height:
            raise ValueError(f"height {height} outside [1, {max_height}]")
        return compute_header(self.config, height)

    def end_of_epoch_header(self, epoch: int) -> BlockHeader:
        self.record(epoch)
        return self.make_header(epoch * self.config.blocks_per_epoch)

    def header_signature(self, epoch: int) -> GroupSignature:
        """Quorum signature over the epoch's end header (computed lazily on
        generated chains, stored on loaded ones)."""
        sig = self._header_sigs.get(epoch)
        if sig is None:
            if self.secret_keys is None:
                raise ValueError("no stored header signature and no secret keys")
            record = self.record(epoch)
            sig = sign_header(
                (self.secret_keys[v] for v in record.quorum.members),
                self.end_of_epoch_header(epoch),
            )
            self._header_sigs[epoch] = sig
        return sig

    def quorum_signature(self, epoch: int) -> GroupSignature:
        """Aggregate of the epoch quorum members' end-of-epoch signatures."""
        record = self.record(epoch)
        return aggregate(record.signatures[v] for v in record.quorum.members)

    # -- serialization ----------------------------------------------------

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            self.write(fh)

    def write(self, fh: BufferedIOBase) -> None:
        cfg = self.config
        fh.write(CHAIN_MAGIC)
        fh.write(
            struct.pack(
                ">QQQQQQQ",
                cfg.n,
                cfg.t,
                cfg.epochs,
                cfg.period_length,
                cfg.churn_per_period,
                cfg.blocks_per_epoch,
                cfg.seed,
            )
        )
        for record in self._records:
            fh.write(struct.pack(">Q", record.index))
            fh.write(struct.pack(">H", len(record.validators)))
            for vid, pk in record.validators:
                fh.write(vid)
                fh.write(pk.to_bytes())
                fh.write(struct.pack(">Q", record.tenures[vid]))
            fh.write(struct.pack(">H", len(record.quorum.members)))
            for vid in record.quorum.members:
                fh.write(vid)
            fh.write(record.quorum.aggregated_key.to_bytes())
            fh.write(struct.pack(">Q", record.quorum.tenure))
            fh.write(record.next_key.to_bytes())
            fh.write(b"\x01" if record.is_break_point else b"\x00")
            fh.write(struct.pack(">H", len(record.signatures)))
            for vid in sorted(record.signatures):
                fh.write(vid)
                fh.write(record.signatures[vid].to_bytes())
            fh.write(self.header_signature(record.index).to_bytes())

    @classmethod
    def load(cls, path) -> "Chain":
        data = Path(path).read_bytes()
        return cls.read(BytesIO(data))

    @classmethod
    def read(cls, fh) -> "Chain":
        def take(n: int) -> bytes:
            chunk = fh.read(n)
            if len(chunk) != n:
                raise ValueError("truncated chain file")
            return chunk

        if take(8) != CHAIN_MAGIC:
            raise ValueError("not a chain file (bad magic)")
        n, t, epochs, period, churn, bpe, seed = struct.unpack(">QQQQQQQ", take(56))
        config = ChainConfig(
            n=n,
            t=t,
            epochs=epochs,
            period_length=period,
            churn_per_period=churn,
            seed=seed,
            blocks_per_epoch=bpe,
        )
        records = []
        header_sigs = {}
        for i in range(1, epochs + 1):
            (index,) = struct.unpack(">Q", take(8))
            if index != i:
                raise ValueError("epoch records out of order")
            (val_count,) = struct.unpack(">H", take(2))
            validators = []
            tenures = {}
            for _ in range(val_count):
                vid = take(32)
                pk = PublicKey.from_bytes(take(48))
                (tenure,) = struct.unpack(">Q", take(8))
                validators.append((vid, pk))
                tenures[vid] = tenure
            (q_count,) = struct.unpack(">H", take(2))
            members = tuple(take(32) for _ in range(q_count))
            agg_key = PublicKey.from_bytes(take(48))
            (q_tenure,) = struct.unpack(">Q", take(8))
            quorum = QuorumDescriptor(
                members=members, aggregated_key=agg_key, tenure=q_tenure
            )
            next_key = PublicKey.from_bytes(take(48))
            is_bp = take(1) == b"\x01"
            (sig_count,) = struct.unpack(">H", take(2))
            signatures = {}
            for _ in range(sig_count):
                vid = take(32)
                signatures[vid] = GroupSignature.from_bytes(take(96))
            header_sigs[i] = GroupSignature.from_bytes(take(96))
            records.append(
                EpochRecord(
                    index=i,
                    validators=tuple(validators),
                    tenures=tenures,
                    quorum=quorum,
                    next_key=next_key,
                    is_break_point=is_bp,
                    signatures=signatures,
                )
            )
        if fh.read(1):
            raise ValueError("trailing bytes in chain file")
        return cls(config, records, secret_keys=None, header_sigs=header_sigs)


def make_header(chain: Chain, height: int) -> BlockHeader:
    return chain.make_header(height)


def generate_chain(cfg: ChainConfig) -> Chain:
    """Deterministically generate a chain for a config.

    Within each period of ``period_length`` epochs the committee is fixed;
    at each boundary the ``churn_per_period`` longest-serving validators
    are rotated out (ties by id), so the running quorum changes at every
    boundary and stays fixed in between. All validators sign every epoch;
    the protocol only ever aggregates quorum members' signatures.
    """
    rng = DeterministicRng(cfg.seed)
    roster: dict[ValidatorId, tuple[SecretKey, PublicKey]] = {}
    tenures: dict[ValidatorId, int] = {}
    all_secrets: dict[ValidatorId, SecretKey] = {}

    def add_validator():
        sk, pk = keygen(rng)
        vid = validator_id(pk)
        roster[vid] = (sk, pk)
        tenures[vid] = 0
        all_secrets[vid] = sk

    for _ in range(cfg.n):
        add_validator()

    # One virtual epoch past the tip defines the tip's upcoming-quorum key.
    epoch_validators: list[tuple[tuple[ValidatorId, PublicKey], ...]] = []
    epoch_tenures: list[dict[ValidatorId, int]] = []
    quorums: list[QuorumDescriptor] = []
    for i in range(1, cfg.epochs + 2):
        if i > 1 and (i - 1) % cfg.period_length == 0 and cfg.churn_per_period:
            victims = sorted(roster, key=lambda v: (-tenures[v], v))
            for vid in victims[: cfg.churn_per_period]:
                del roster[vid]
                del tenures[vid]
            for _ in range(cfg.churn_per_period):
                add_validator()
        for vid in roster:
            tenures[vid] += 1
        pks = {vid: pk for vid, (_, pk) in roster.items()}
        epoch_validators.append(tuple(sorted(pks.items())))
        epoch_tenures.append(dict(tenures))
        quorums.append(longest_running_quorum(tenures, pks, cfg.t))

    # next_keys[i] is the upcoming-quorum key announced by epoch i,
    # i.e. the aggregated key of epoch i+1's quorum; index 0 is the
    # genesis anchor (epoch 1's quorum key).
    next_keys = [quorums[0].aggregated_key]
    next_keys += [quorums[i].aggregated_key for i in range(1, cfg.epochs + 1)]

    records = []
    for i in range(1, cfg.epochs + 1):
        is_bp = next_keys[i] != next_keys[i - 1]
        validators = epoch_validators[i - 1]
        signatures = {
            vid: epoch_sign(
                all_secrets[vid], i, is_bp, next_keys[i] if is_bp else None
            )
            for vid, _ in validators
        }
        records.append(
            EpochRecord(
                index=i,
                validators=validators,
                tenures=epoch_tenures[i - 1],
                quorum=quorums[i - 1],
                next_key=next_keys[i],
                is_break_point=is_bp,
                signatures=signatures,
            )
        )
    return Chain(cfg, records, secret_keys=all_secrets)
