"""Benchmark harness: proof size, prover work, verifier work and
end-to-end latency versus update distance, for the three aggregation
strategies and the sequential-verification baseline.

Counts (bytes, pairings, group products) are deterministic and are the
primary signal; wall-clock columns are environment-specific. End-to-end
times are measured over a loopback connection plus a fixed configured
round-trip delay.
"""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass

from . import bls
from .chain import Chain
from .fullnode import SignatureStore
from .lightclient import initial_state, sv_sync, verify_update
from .net import FullNodeServer, LightClientTransport
from .wire import encode_proof

OUR_STRATEGIES = ("none", "pre1", "pre32")
ALL_STRATEGIES = OUR_STRATEGIES + ("sv",)

CSV_COLUMNS = (
    "strategy",
    "m",
    "ell",
    "proof_bytes",
    "build_ms",
    "verify_ms",
    "e2e_ms",
    "pairings",
    "mults",
    "trials",
)


def sv_bytes_per_epoch(n: int) -> int:
    """The baseline ships every validator key plus one signature per epoch."""
    return n * 48 + 96


@dataclass
class BenchRow:
    strategy: str
    m: int
    ell: int
    proof_bytes: int
    build_ms: float
    verify_ms: float
    e2e_ms: float
    pairings: int
    mults: int
    trials: int
    build_ms_std: float = 0.0
    verify_ms_std: float = 0.0
    e2e_ms_std: float = 0.0


def _mean_std(samples: list[float]) -> tuple[float, float]:
    if len(samples) == 1:
        return samples[0], 0.0
    return statistics.mean(samples), statistics.stdev(samples)


def _bench_our_strategy(
    chain: Chain, strategy: str, m_values, trials: int, rtt_ms: float
) -> list[BenchRow]:
    store = SignatureStore(chain, strategy=strategy)
    rows = []
    with FullNodeServer(store) as server:
        transport = LightClientTransport(server.address)
        try:
            for m in m_values:
                e1 = chain.tip_epoch - m
                state = initial_state(chain, e1)
                # warm hash caches so the first trial is not an outlier
                verify_update(state, store.build_proof(e1))
                build_t, verify_t, e2e_t = [], [], []
                proof_bytes = ell = pairings = mults = 0
                for _ in range(trials):
                    t0 = time.perf_counter()
                    proof, trace = store.build_proof_with_trace(e1)
                    build_t.append((time.perf_counter() - t0) * 1e3)
                    encoded = encode_proof(proof)
                    proof_bytes = len(encoded)
                    ell = len(proof.break_points)
                    mults = trace.multiplications
                    t0 = time.perf_counter()
                    with bls.measure() as ops:
                        verify_update(state, proof)
                    verify_t.append((time.perf_counter() - t0) * 1e3)
                    pairings = ops.pairings
                    t0 = time.perf_counter()
                    served = transport.request(e1)
                    verify_update(state, served)
                    e2e_t.append((time.perf_counter() - t0) * 1e3 + rtt_ms)
                build_ms, build_std = _mean_std(build_t)
                verify_ms, verify_std = _mean_std(verify_t)
                e2e_ms, e2e_std = _mean_std(e2e_t)
                rows.append(
                    BenchRow(
                        strategy=strategy,
                        m=m,
                        ell=ell,
                        proof_bytes=proof_bytes,
                        build_ms=build_ms,
                        verify_ms=verify_ms,
                        e2e_ms=e2e_ms,
                        pairings=pairings,
                        mults=mults,
                        trials=trials,
                        build_ms_std=build_std,
                        verify_ms_std=verify_std,
                        e2e_ms_std=e2e_std,
                    )
                )
        finally:
            transport.close()
    return rows


def _bench_sv(chain: Chain, m_values, trials: int, rtt_ms: float) -> list[BenchRow]:
    store = SignatureStore(chain)
    rows = []
    for m in m_values:
        e1 = chain.tip_epoch - m
        state = initial_state(chain, e1)
        ell = len(store.find_break_points(e1, chain.tip_epoch))
        sv_sync(chain, state, chain.tip_epoch)  # warm caches
        verify_t = []
        pairings = 0
        for _ in range(trials):
            t0 = time.perf_counter()
            with bls.measure() as ops:
                sv_sync(chain, state, chain.tip_epoch)
            verify_t.append((time.perf_counter() - t0) * 1e3)
            pairings = ops.pairings
        verify_ms, verify_std = _mean_std(verify_t)
        rows.append(
            BenchRow(
                strategy="sv",
                m=m,
                ell=ell,
                proof_bytes=m * sv_bytes_per_epoch(chain.config.n),
                build_ms=0.0,  # the node only relays stored data
                verify_ms=verify_ms,
                e2e_ms=verify_ms + rtt_ms,
                pairings=pairings,
                mults=0,
                trials=trials,
                verify_ms_std=verify_std,
                e2e_ms_std=verify_std,
            )
        )
    return rows


def run_benchmark(
    chain: Chain,
    m_values,
    strategies=ALL_STRATEGIES,
    trials: int = 50,
    rtt_ms: float = 30.0,
    sv_trials: int | None = None,
) -> list[BenchRow]:
    """One row per (strategy, m). The baseline may use fewer trials since
    its per-trial cost grows linearly with m."""
    m_values = list(m_values)
    if not m_values or not strategies:
        raise ValueError("need at least one update distance and one strategy")
    if max(m_values) > chain.tip_epoch - 1:
        raise ValueError(
            f"chain too short: need tip > {max(m_values)}, have {chain.tip_epoch}"
        )
    if min(m_values) < 1:
        raise ValueError("update distances must be >= 1")
    rows = []
    for strategy in strategies:
        if strategy == "sv":
            rows.extend(_bench_sv(chain, m_values, sv_trials or trials, rtt_ms))
        elif strategy in OUR_STRATEGIES:
            rows.extend(_bench_our_strategy(chain, strategy, m_values, trials, rtt_ms))
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
    return rows


def emit_report(rows: list[BenchRow], csv_path=None) -> str:
    """Write the CSV table and return a human-readable summary including
    the byte-size ratios against the baseline."""
    if not rows:
        raise ValueError("no benchmark rows")
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([getattr(row, c) for c in CSV_COLUMNS])
    lines = []
    header = (
        f"{'strategy':>8} {'m':>6} {'ell':>4} {'bytes':>9} {'build_ms':>10}"
        f" {'verify_ms':>10} {'e2e_ms':>10} {'pairings':>9} {'mults':>9}"
    )
    lines.append(header)
    for row in rows:
        lines.append(
            f"{row.strategy:>8} {row.m:>6} {row.ell:>4} {row.proof_bytes:>9}"
            f" {row.build_ms:>10.2f} {row.verify_ms:>10.2f} {row.e2e_ms:>10.2f}"
            f" {row.pairings:>9} {row.mults:>9}"
        )
    sv_rows = {r.m: r for r in rows if r.strategy == "sv"}
    ours = [r for r in rows if r.strategy != "sv"]
    if sv_rows and ours:
        lines.append("")
        lines.append("baseline bytes / our bytes:")
        seen = set()
        for row in ours:
            if row.m in sv_rows and row.m not in seen:
                seen.add(row.m)
                ratio = sv_rows[row.m].proof_bytes / row.proof_bytes
                lines.append(f"  m={row.m:>6}: {ratio:8.1f}x")
    return "\n".join(lines)
