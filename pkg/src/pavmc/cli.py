"""Command-line front end: verify, explore, simulate and rf.

Exit codes: 0 satisfied (or a command that completed), 1 not satisfied,
2 any error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import RfOptions, dump_config, load_settings
from .crypto import CryptoError
from .ctl import DEFAULT_BUDGET, ORDERS, ResourceError, TraceError, check, explore, pretty
from .epistemic import ObservableSpec, augment, build_rf_strong, build_rf_weak
from .kernel import CheckerError, ExprSyntaxError, ModelError, QueryError
from .model import ConfigError, ModelConfig, build_network
from .query import parse_query
from .report import dumps, trace_document

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
ERRORS = (ConfigError, CryptoError, ExprSyntaxError, ModelError, QueryError, CheckerError,
          ResourceError, TraceError, OSError)


def _settings(args) -> tuple[ModelConfig, RfOptions]:
    if args.config is None:
        return ModelConfig(), RfOptions()
    return load_settings(args.config)


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def _report(args, cfg, query: str, verdict, elapsed: float) -> dict:
    return {
        "config": dump_config(cfg),
        "query": query,
        "verdict": "SATISFIED" if verdict.satisfied else "NOT SATISFIED",
        "method": verdict.method,
        "statistics": verdict.stats.as_dict(),
        "seed": args.seed,
        "search": args.search,
        "wall_time": 0.0 if args.deterministic else round(elapsed, 3),
    }


def _emit(args, network, cfg, query: str, verdict, elapsed: float) -> int:
    word = "SATISFIED" if verdict.satisfied else "NOT SATISFIED"
    print(word)
    st = verdict.stats
    print(f"states: {st.states}  transitions: {st.transitions}  method: {verdict.method}"
          + ("" if args.deterministic else f"  time: {elapsed:.2f}s"))
    if args.trace:
        if verdict.trace is None:
            print("no trace for this verdict", file=sys.stderr)
        doc = trace_document(network, verdict.trace, dump_config(cfg), query, word)
        _write(args.trace, dumps(doc))
    if args.report:
        _write(args.report, dumps(_report(args, cfg, query, verdict, elapsed)))
    return EXIT_OK if verdict.satisfied else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg, _ = _settings(args)
    if args.corrupt_mixer:
        cfg = replace(cfg, corrupt_mtellers=tuple(sorted(set(args.corrupt_mixer))))
    q = parse_query(args.query)
    net = build_network(cfg)
    t = time.perf_counter()
    v = check(net, q.formula, order=args.search, seed=args.seed, budget=args.budget)
    return _emit(args, net, cfg, pretty(q.formula), v, time.perf_counter() - t)


def cmd_rf(args) -> int:
    cfg, opts = _settings(args)
    if not 0 <= args.voter < cfg.v_total:
        raise ConfigError(f"voter {args.voter} out of range")
    if not 0 <= args.candidate < cfg.c_total:
        raise ConfigError(f"candidate {args.candidate} out of range")
    spec = ObservableSpec.pretavoter(cfg.v_total, cfg.c_total, opts.reselect, opts.strict)
    net = augment(build_network(cfg), spec)
    build = build_rf_weak if args.variant == "weak" else build_rf_strong
    f = build(args.voter, args.candidate)
    t = time.perf_counter()
    v = check(net, f, order=args.search, seed=args.seed, budget=args.budget)
    return _emit(args, net, cfg, pretty(f), v, time.perf_counter() - t)


def cmd_explore(args) -> int:
    cfg, _ = _settings(args)
    net = build_network(cfg)
    t = time.perf_counter()
    st = explore(net, order=args.search, seed=args.seed, budget=args.budget)
    elapsed = time.perf_counter() - t
    print(f"states: {st.states}  transitions: {st.transitions}  deadlocks: {st.deadlocks}  "
          f"max frontier: {st.max_frontier}  time: {elapsed:.2f}s")
    if args.stats_json:
        doc = {"config": dump_config(cfg), "statistics": st.as_dict(),
               "wall_time": round(elapsed, 3)}
        _write(args.stats_json, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if st.truncated:
        print(f"error: state budget {args.budget} exceeded, count is a lower bound",
              file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.steps < 0:
        raise ConfigError("--steps must be >= 0")
    cfg, _ = _settings(args)
    net = build_network(cfg)
    rng = random.Random(args.seed)
    state = net.initial_state()
    prev = net.describe(state)
    print("initial:", json.dumps(prev, sort_keys=True))
    for i in range(1, args.steps + 1):
        succ = net.successors(state)
        if not succ:
            print(f"deadlock after {i - 1} steps")
            break
        label, state = rng.choice(succ)
        now = net.describe(state)
        delta = {k: x for k, x in now.items() if prev[k] != x}
        who = ", ".join(net.instances[k].name for k, _ in label.participants)
        print(f"step {i}: {label.kind} {label.channel} [{who}] {json.dumps(delta, sort_keys=True)}")
        prev = now
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pavmc", description="Model checker for a Pret a Voter style election model")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, search="bfs"):
        sp.add_argument("--config", help="key = value model configuration file")
        sp.add_argument("--search", choices=ORDERS, default=search)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="state budget")

    def outputs(sp):
        sp.add_argument("--trace", help="write the witness or counterexample as JSON")
        sp.add_argument("--report", help="write the run report as JSON")
        sp.add_argument("--deterministic", action="store_true",
                        help="leave timings out so reports are reproducible")

    v = sub.add_parser("verify", help="check one query")
    common(v)
    outputs(v)
    v.add_argument("--query", required=True)
    v.add_argument("--corrupt-mixer", type=int, action="append", default=[],
                   help="mix teller index to corrupt (repeatable)")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("rf", help="receipt-freeness for one voter and candidate")
    common(r, search="dfs")
    outputs(r)
    r.add_argument("--voter", type=int, required=True)
    r.add_argument("--candidate", type=int, required=True)
    r.add_argument("--variant", choices=("weak", "strong"), default="weak")
    r.set_defaults(fn=cmd_rf)

    e = sub.add_parser("explore", help="count reachable states")
    common(e)
    e.add_argument("--stats-json", help="write statistics as JSON")
    e.set_defaults(fn=cmd_explore)

    s = sub.add_parser("simulate", help="random run")
    s.add_argument("--config")
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
