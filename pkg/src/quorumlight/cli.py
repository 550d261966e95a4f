"""Command-line entry points: chain generation, the full-node server, a
one-shot light client, the benchmark harness and the baseline sync."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .bench import ALL_STRATEGIES, emit_report, run_benchmark
from .chain import Chain, ChainConfig, generate_chain
from .fullnode import SignatureStore
from .lightclient import (
    RejectReason,
    UpdateRejected,
    initial_state,
    sv_sync,
    verify_update,
)
from .net import FullNodeServer, ProtocolError, ServerErrorResponse, request_update
from .wire import load_client_state, save_client_state

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_STALE = 3

_PRECOMPUTE = {"none": "none", "1": "pre1", "32": "pre32"}


def _parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"address must be host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


def _cmd_genchain(args) -> int:
    cfg = ChainConfig(
        n=args.n,
        t=args.t,
        epochs=args.epochs,
        period_length=args.period,
        churn_per_period=args.churn,
        seed=args.seed,
        blocks_per_epoch=args.blocks_per_epoch,
    )
    chain = generate_chain(cfg)
    chain.save(args.out)
    print(
        f"wrote {args.out}: {cfg.epochs} epochs, n={cfg.n}, t={cfg.t},"
        f" {len(chain.break_points)} break points"
    )
    return EXIT_OK


def _cmd_fullnode(args) -> int:
    chain = Chain.load(args.chain)
    store = SignatureStore(chain, strategy=_PRECOMPUTE[args.precompute])
    host, port = args.listen
    server = FullNodeServer(store, host=host, port=port)
    bound = server.address
    print(f"listening on {bound[0]}:{bound[1]} (tip epoch {store.tip_epoch})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def _cmd_client(args) -> int:
    state_path = Path(args.state)
    if state_path.exists():
        state = load_client_state(state_path)
    elif args.init_from_chain:
        state = initial_state(Chain.load(args.init_from_chain))
        save_client_state(state_path, state)
    else:
        print(f"no state file at {state_path} (use --init-from-chain)", file=sys.stderr)
        return EXIT_FAILURE

    t0 = time.perf_counter()
    try:
        proof = request_update(args.server, state.epoch)
    except (ServerErrorResponse, ProtocolError, OSError) as exc:
        print(f"update failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    from .wire import encode_proof

    proof_len = len(encode_proof(proof))
    try:
        new_state = verify_update(state, proof)
    except UpdateRejected as exc:
        if exc.reason is RejectReason.STALE:
            print(f"already current at epoch {state.epoch} (proof was stale)")
            return EXIT_STALE
        print(f"proof rejected: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    save_client_state(state_path, new_state)
    print(
        f"epoch {state.epoch} -> {new_state.epoch},"
        f" digest {new_state.state_digest.hex()},"
        f" proof {proof_len} bytes, {elapsed_ms:.1f} ms"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    chain = Chain.load(args.chain)
    m_values = [int(x) for x in args.m.split(",") if x]
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    rows = run_benchmark(
        chain,
        m_values,
        strategies=strategies,
        trials=args.trials,
        rtt_ms=args.rtt_ms,
        sv_trials=args.sv_trials,
    )
    print(emit_report(rows, csv_path=args.out))
    if args.out:
        print(f"\nwrote {args.out}")
    return EXIT_OK


def _cmd_sv_sync(args) -> int:
    chain = Chain.load(args.chain)
    state = initial_state(chain, args.from_epoch)
    final = sv_sync(chain, state, args.to_epoch)
    print(
        f"epoch {args.from_epoch} -> {final.epoch},"
        f" digest {final.state_digest.hex()}, height {final.height}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quorumlight",
        description="Light-client sync for committee chains with static quorums",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genchain", help="generate a synthetic chain file")
    p.add_argument("--n", type=int, required=True, help="committee size")
    p.add_argument("--t", type=int, required=True, help="quorum threshold")
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--period", type=int, required=True, help="epochs per static period")
    p.add_argument("--churn", type=int, required=True, help="validators replaced per period")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks-per-epoch", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_genchain)

    p = sub.add_parser("fullnode", help="serve proofs from a chain file")
    p.add_argument("--chain", required=True)
    p.add_argument(
        "--listen",
        type=_parse_address,
        default=os.environ.get("QL_LISTEN", "127.0.0.1:0"),
        help="host:port (QL_LISTEN env var as fallback; port 0 picks one)",
    )
    p.add_argument("--precompute", choices=sorted(_PRECOMPUTE), default="none")
    p.set_defaults(func=_cmd_fullnode)

    p = sub.add_parser("client", help="perform one light-client update")
    p.add_argument("--server", type=_parse_address, required=True)
    p.add_argument("--state", required=True, help="client state file (created if missing)")
    p.add_argument("--init-from-chain", help="chain file for first-run trust anchor")
    p.set_defaults(func=_cmd_client)

    p = sub.add_parser("bench", help="run the benchmark harness")
    p.add_argument("--chain", required=True)
    p.add_argument("--m", default="2,8,64,512,4096", help="comma-separated distances")
    p.add_argument("--strategies", default=",".join(ALL_STRATEGIES))
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--sv-trials", type=int, default=None)
    p.add_argument("--rtt-ms", type=float, default=30.0)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("sv-sync", help="run the sequential baseline directly")
    p.add_argument("--chain", required=True)
    p.add_argument("--from", dest="from_epoch", type=int, required=True)
    p.add_argument("--to", dest="to_epoch", type=int, required=True)
    p.set_defaults(func=_cmd_sv_sync)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # parse_address default may still be a string when taken from the env
    if getattr(args, "listen", None) is not None and isinstance(args.listen, str):
        args.listen = _parse_address(args.listen)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
