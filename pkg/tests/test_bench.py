"""Benchmark harness: row cardinality, deterministic count columns,
closed-form byte accounting, report output."""

import csv

import pytest

from quorumlight.bench import (
    CSV_COLUMNS,
    emit_report,
    run_benchmark,
    sv_bytes_per_epoch,
)
from quorumlight.wire import proof_encoded_size


def test_sv_bytes_formula_matches_encodings():
    # one compressed key per validator plus one aggregated signature
    assert sv_bytes_per_epoch(16) == 16 * 48 + 96 == 864
    assert sv_bytes_per_epoch(128) == 6240


def test_row_cardinality_and_schema(mid_chain, tmp_path):
    rows = run_benchmark(
        mid_chain, [2, 8, 32, 100], strategies=("none", "pre1"), trials=1, rtt_ms=0.0
    )
    assert len(rows) == 8
    out = tmp_path / "results.csv"
    summary = emit_report(rows, csv_path=out)
    with open(out) as fh:
        table = list(csv.reader(fh))
    assert table[0] == list(CSV_COLUMNS)
    assert len(table) == 9
    assert "bytes" in summary


def test_count_columns_deterministic(mid_chain):
    a = run_benchmark(mid_chain, [4, 64], strategies=("none", "pre32"), trials=1, rtt_ms=0.0)
    b = run_benchmark(mid_chain, [4, 64], strategies=("none", "pre32"), trials=1, rtt_ms=0.0)
    for ra, rb in zip(a, b):
        assert (ra.strategy, ra.m, ra.ell) == (rb.strategy, rb.m, rb.ell)
        assert ra.proof_bytes == rb.proof_bytes
        assert ra.pairings == rb.pairings
        assert ra.mults == rb.mults


def test_proof_bytes_match_closed_form(mid_chain):
    rows = run_benchmark(mid_chain, [2, 50, 130], strategies=("pre1",), trials=1, rtt_ms=0.0)
    for row in rows:
        assert row.proof_bytes in (
            proof_encoded_size(row.ell, True),
            proof_encoded_size(row.ell, False),
        )


def test_sv_rows_and_ratio_summary(mid_chain):
    rows = run_benchmark(
        mid_chain, [2, 32], strategies=("pre1", "sv"), trials=1, rtt_ms=0.0
    )
    sv = [r for r in rows if r.strategy == "sv"]
    assert [r.proof_bytes for r in sv] == [
        2 * sv_bytes_per_epoch(mid_chain.config.n),
        32 * sv_bytes_per_epoch(mid_chain.config.n),
    ]
    # sequential verification pays two pairings per epoch plus the header
    assert [r.pairings for r in sv] == [2 * 2 + 2, 2 * 32 + 2]
    summary = emit_report(rows)
    assert "baseline bytes / our bytes" in summary


def test_rtt_is_added_to_e2e(mid_chain):
    fast = run_benchmark(mid_chain, [2], strategies=("pre1",), trials=1, rtt_ms=0.0)[0]
    slow = run_benchmark(mid_chain, [2], strategies=("pre1",), trials=1, rtt_ms=500.0)[0]
    assert slow.e2e_ms - fast.e2e_ms == pytest.approx(500.0, abs=100.0)


def test_insufficient_chain_is_error(small_chain):
    with pytest.raises(ValueError):
        run_benchmark(small_chain, [small_chain.tip_epoch], strategies=("none",), trials=1)
    with pytest.raises(ValueError):
        run_benchmark(small_chain, [0], strategies=("none",), trials=1)
    with pytest.raises(ValueError):
        run_benchmark(small_chain, [2], strategies=("warp",), trials=1)
