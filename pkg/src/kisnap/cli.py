"""Command-line interface.

Subcommands:

* `run`           one seeded or replayed run of a catalog algorithm
* `explore`       exhaustive enumeration of all schedules, with checks
* `matrix`        the (t, k) agreement-bound sweep
* `check`         run a property checker over a stored trace
* `simulate`      the two-simulator emulation of a k-IS algorithm
* `demo-blocking` the blocking strawman under initial crashes

Every subcommand exits 0 exactly when everything it verified passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .checkers import (
    check_consensus_linearizable,
    check_is,
    check_theorem1,
    check_xsa,
    validate_trace,
)
from .core import ReplaySchedule, run, run_random
from .experiments import (
    render_matrix,
    run_blocking_demo,
    run_equivalence_suite,
    run_matrix,
    standard_reports,
)
from .explore import enumerate_runs
from .reductions import ALGORITHMS, make_instance
from .simulation import (
    build_simulation,
    check_simulation_trace,
    simulate,
)
from .trace import (
    encode_value,
    read_schedule,
    read_trace,
    write_schedule,
    write_trace,
)


def _parse_inputs(text: str | None, n: int):
    if text is None:
        return None
    vals = tuple(int(x) for x in text.split(","))
    if len(vals) != n:
        raise SystemExit(f"--inputs needs {n} comma-separated values")
    return vals


def _print_outcomes(trace) -> None:
    for pid in sorted(trace.outcomes):
        out = trace.outcomes[pid]
        if out[0] == "returned":
            print(f"  p{pid}: returned {out[1]!r}")
        else:
            print(f"  p{pid}: {out[0]}")
    flags = []
    if trace.quiescent:
        flags.append("quiescent")
    if trace.truncated:
        flags.append("truncated")
    if flags:
        print("  flags:", ", ".join(flags))


def _cmd_run(args) -> int:
    inputs = _parse_inputs(args.inputs, args.n)
    inst = make_instance(args.algo, args.n, args.t, args.k, inputs)
    if args.schedule.startswith("replay:"):
        actions = read_schedule(args.schedule[len("replay:") :])
        res = run(inst, ReplaySchedule(actions))
    elif args.schedule == "random":
        res = run_random(inst, args.seed)
    else:
        raise SystemExit(f"unknown schedule {args.schedule!r}")
    trace = res.trace
    print(f"{args.algo} n={args.n} t={args.t} k={args.k} seed={args.seed}")
    _print_outcomes(trace)
    ok = not trace.truncated
    if args.check:
        for rep in standard_reports(trace):
            print(rep)
            ok = ok and rep.passed
    if args.out:
        write_trace(args.out, trace)
        print(f"trace written to {args.out}")
    if args.save_schedule:
        write_schedule(args.save_schedule, res.actions)
        print(f"schedule written to {args.save_schedule}")
    return 0 if ok else 1


def _cmd_explore(args) -> int:
    inputs = _parse_inputs(args.inputs, args.n)
    inst = make_instance(args.algo, args.n, args.t, args.k, inputs)
    count = 0
    failed = 0
    decision_sets = set()
    outcomes = {"returned": 0, "crashed": 0, "blocked": 0}
    for tr in enumerate_runs(
        inst, reduced=not args.literal, max_runs=args.max_runs
    ):
        count += 1
        decision_sets.add(frozenset(tr.decisions().values()))
        for out in tr.outcomes.values():
            outcomes[out[0]] += 1
        if args.check:
            for rep in standard_reports(tr):
                if not rep.passed:
                    failed += 1
                    print(f"run {count}: FAIL")
                    print(rep)
    mode = "literal" if args.literal else "reduced"
    print(
        f"{args.algo} n={args.n} t={args.t} k={args.k}: {count} {mode} runs, "
        f"{len(decision_sets)} distinct decision sets, "
        f"max decisions {max((len(d) for d in decision_sets), default=0)}"
    )
    print(f"per-process outcomes: {outcomes}")
    if args.check:
        print(f"checked runs: {count}, failures: {failed}")
    if args.out:
        summary = {
            "algo": args.algo,
            "n": args.n,
            "t": args.t,
            "k": args.k,
            "mode": mode,
            "runs": count,
            "decision_sets": sorted(
                [[encode_value(v) for v in sorted(d, key=repr)] for d in decision_sets],
                key=repr,
            ),
            "outcomes": outcomes,
            "check_failures": failed,
        }
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2)
        print(f"summary written to {args.out}")
    return 0 if failed == 0 else 1


def _cmd_matrix(args) -> int:
    exhaustive = True if args.exhaustive else (False if args.random else None)
    report = run_matrix(
        args.n,
        trials=args.trials,
        seed=args.seed,
        exhaustive=exhaustive,
        progress=args.progress,
    )
    print(render_matrix(report))
    print(f"elapsed: {report.elapsed:.1f}s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
        print(f"report written to {args.out}")
    if args.witness:
        bad = next((c for c in report.cells if not c.ok and c.witness), None)
        if bad:
            write_trace(args.witness, bad.witness)
            print(f"violation witness written to {args.witness}")
    return 0 if report.passed else 1


def _cmd_check(args) -> int:
    trace = read_trace(args.trace)
    problems = validate_trace(trace)
    for p in problems:
        print(f"malformed trace: {p}")
    kind = args.kind
    if kind == "is":
        rep = check_is(trace, args.obj, k=args.k)
    elif kind == "theorem1":
        if args.k is None:
            raise SystemExit("theorem1 check needs --k")
        rep = check_theorem1(trace, args.obj, k=args.k)
    elif kind == "xsa":
        if args.x is None:
            raise SystemExit("xsa check needs --x")
        rep = check_xsa(trace, args.x, obj=args.obj)
    elif kind == "consensus":
        rep = check_consensus_linearizable(trace, args.obj)
    else:
        raise SystemExit(f"unknown check kind {kind!r}")
    print(rep)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep.to_dict(), fh, indent=2)
    return 0 if rep.passed and not problems else 1


def _cmd_simulate(args) -> int:
    q_inputs = (
        tuple(int(x) for x in args.inputs.split(",")) if args.inputs else (0, 1)
    )
    if len(q_inputs) != 2:
        raise SystemExit("--inputs needs exactly 2 values (one per simulator)")
    if args.exhaustive:
        inst = build_simulation(args.inner_algo, args.n, args.t, args.k, q_inputs)
        count = 0
        failures = 0
        for tr in enumerate_runs(inst, reduced=True):
            count += 1
            chk = check_simulation_trace(tr)
            if not chk.passed:
                failures += 1
                for rep in chk.reports:
                    if not rep.passed:
                        print(f"run {count}: {rep}")
        print(
            f"simulation {args.inner_algo} n={args.n} t={args.t} k={args.k}: "
            f"{count} outer schedules, {failures} check failures"
        )
        return 0 if failures == 0 else 1
    res, chk = simulate(
        args.inner_algo, args.n, args.t, args.k, q_inputs, seed=args.seed
    )
    print(f"simulators decided: {chk.q_decisions}")
    print(f"inner decisions:    {chk.inner_decisions}")
    for obj, (peak, at, ok) in chk.lemma1.items():
        print(
            f"  {obj}: max {peak} processes inside at step {at} "
            f"(need >= n-k = {args.n - args.k}: {'ok' if ok else 'FAIL'})"
        )
    for rep in chk.reports:
        print(rep)
    if args.out_prefix:
        write_trace(f"{args.out_prefix}.outer.jsonl", res.trace)
        write_trace(f"{args.out_prefix}.inner.jsonl", chk.inner)
        print(
            f"traces written to {args.out_prefix}.outer.jsonl "
            f"and {args.out_prefix}.inner.jsonl"
        )
    return 0 if chk.passed else 1


def _cmd_demo_blocking(args) -> int:
    report = run_blocking_demo(args.n, args.t, args.k, seeds=args.seeds)
    blocked_all = sum(1 for r in report.runs if r["ok"])
    print(
        f"naive k-IS attempt at n={args.n} t={args.t} k={args.k}: "
        f"{blocked_all}/{len(report.runs)} seeded runs ended with every "
        "survivor blocked"
    )
    if report.passed:
        print(
            "as predicted: with k < t the wait for n-k published values can "
            "never finish once t processes crash first"
        )
    else:
        for r in report.runs:
            if not r["ok"]:
                print(f"  unexpected progress at seed {r['seed']}: {r}")
    return 0 if report.passed else 1


def _cmd_equivalence(args) -> int:
    report = run_equivalence_suite(
        args.n, args.t, args.k, trials=args.trials, seed=args.seed
    )
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kisnap",
        description=(
            "Deterministic simulator and checkers for crash-prone "
            "shared-memory agreement objects"
        ),
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, k_required=True):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--t", type=int, required=True)
        p.add_argument("--k", type=int, required=k_required, default=None)
        p.add_argument("--inputs", help="comma-separated per-process inputs")

    p = sub.add_parser("run", help="one seeded or replayed run")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    common(p, k_required=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--schedule",
        default="random",
        help="'random' (default) or 'replay:<schedule.jsonl>'",
    )
    p.add_argument("--out", help="write the trace to this JSONL file")
    p.add_argument("--save-schedule", help="write the adversary choices here")
    p.add_argument("--check", action="store_true", help="run standard checks")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("explore", help="enumerate all schedules exhaustively")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    common(p, k_required=False)
    p.add_argument(
        "--literal",
        action="store_true",
        help="enumerate every interleaving (default: partial-order reduced)",
    )
    p.add_argument("--max-runs", type=int, default=None)
    p.add_argument("--check", action="store_true", help="check every run")
    p.add_argument("--out", help="write a JSON summary here")
    p.set_defaults(fn=_cmd_explore)

    p = sub.add_parser("matrix", help="agreement-bound sweep over (t, k)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--random", action="store_true")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--witness", help="write a violation witness trace here")
    p.set_defaults(fn=_cmd_matrix)

    p = sub.add_parser("check", help="check a stored trace")
    p.add_argument("--trace", required=True)
    p.add_argument(
        "--kind", choices=("is", "theorem1", "xsa", "consensus"), required=True
    )
    p.add_argument("--obj", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("simulate", help="two-simulator emulation")
    p.add_argument("--inner-algo", default="alg1_variant")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--inputs", help="two comma-separated simulator inputs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--out-prefix", help="write outer/inner traces here")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("demo-blocking", help="naive k<t attempt blocks")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seeds", type=int, default=100)
    p.set_defaults(fn=_cmd_demo_blocking)

    p = sub.add_parser("equivalence", help="consensus/k-IS equivalence suite")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_equivalence)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
