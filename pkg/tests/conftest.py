import random

import pytest

from quorumlight import ChainConfig, DeterministicRng, generate_chain, keygen

ACCEPTANCE_CRITERIA = {
    "test_c1": "1 (byte-exact 152-byte period unit)",
    "test_c2": "2 (sequential-verification oracle equivalence)",
    "test_c3": "3 (telescoping/transitivity)",
    "test_c4": "4 (soundness under corruption and structured attacks)",
    "test_c5": "5 (constant verifier work)",
    "test_c6": "6 (prover multiplication scaling)",
    "test_c7": "7 (strategy path-independence)",
    "test_c8": "8 (desk-scale curve shapes)",
    "test_c9": "9 (end-to-end CLI pipeline)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            for prefix, title in ACCEPTANCE_CRITERIA.items():
                if name.startswith(prefix):
                    verdict = "PASS" if outcome == "passed" else "FAIL"
                    lines[title] = verdict
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for title in sorted(lines, key=lambda t: int(t.split(" ")[0])):
            terminalreporter.write_line(f"criterion {title}: {lines[title]}")


@pytest.fixture(scope="session")
def key_pool():
    """Twenty reusable keypairs for combinatorial tests."""
    rng = DeterministicRng(0xBEEF)
    return [keygen(rng) for _ in range(20)]


@pytest.fixture(scope="session")
def small_chain():
    """Six validators, three periods of eight epochs, one replaced per period."""
    cfg = ChainConfig(
        n=6, t=4, epochs=24, period_length=8, churn_per_period=1, seed=42
    )
    return generate_chain(cfg)


@pytest.fixture(scope="session")
def static_chain():
    """No churn: a single static-quorum run across the whole chain."""
    cfg = ChainConfig(
        n=5, t=4, epochs=16, period_length=8, churn_per_period=0, seed=3
    )
    return generate_chain(cfg)


@pytest.fixture(scope="session")
def mid_chain():
    """Enough periods for multi-subperiod proofs and 32-epoch windows."""
    cfg = ChainConfig(
        n=8, t=6, epochs=160, period_length=40, churn_per_period=2, seed=2024
    )
    return generate_chain(cfg)


@pytest.fixture(scope="session")
def desk_chain():
    """Desk-scale evaluation chain: 2^12 epochs, 16 periods of 256."""
    cfg = ChainConfig(
        n=16, t=11, epochs=4096, period_length=256, churn_per_period=2,
        seed=0x20260809,
    )
    return generate_chain(cfg)


@pytest.fixture()
def rnd():
    return random.Random(0xC0FFEE)
