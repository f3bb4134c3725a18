"""Experiment drivers: the (t, k) agreement matrix, the blocking strawman
demo, and the consensus/k-IS equivalence suite.

The matrix driver sweeps every cell 1 <= t <= k <= n-1, runs the k-IS-based
set-agreement reduction under adversarial schedules (exhaustively for small
n, seeded-random otherwise), and compares the observed maximum number of
distinct decisions against the closed-form bound max(1, t+k-(n-2)). Reports
are plain data (JSON-ready dicts plus a text table); rendering figures is
out of scope.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .checkers import CheckReport, check_consensus_linearizable, check_is, check_theorem1, check_xsa
from .core import run_random
from .explore import enumerate_runs
from .reductions import make_instance, xsa_bound
from .trace import Trace


def trial_seed(seed: int, *parts) -> str:
    """Deterministic per-trial seed string (stable across platforms)."""
    return ":".join(str(p) for p in (seed, *parts))


def standard_reports(trace: Trace) -> list[CheckReport]:
    """The property checks appropriate for a trace, by the algorithm that
    produced it (from trace meta)."""
    algo = trace.meta.get("algo")
    n, t, k = trace.n, trace.t, trace.k
    if algo in ("alg1", "alg1_variant", "alg1_over_alg2"):
        reports = [check_xsa(trace, xsa_bound(n, t, k))]
        if algo == "alg1":
            reports.append(check_is(trace, "kis", k=k))
        elif algo == "alg1_variant":
            reports.append(check_is(trace, "kis1", k=k))
            reports.append(check_is(trace, "kis2", k=k))
        else:
            reports.append(check_is(trace, "ckis", k=k))
            reports.append(check_consensus_linearizable(trace, "cs"))
        return reports
    if algo == "alg2":
        return [
            check_is(trace, "ckis", k=k),
            check_theorem1(trace, "ckis", k=k),
            check_is(trace, "is"),
            check_consensus_linearizable(trace, "cs"),
        ]
    if algo == "naive":
        return [check_is(trace, "nkis", k=k)]
    if algo == "kis_oracle":
        return [check_is(trace, "kis", k=k), check_theorem1(trace, "kis", k=k)]
    if algo == "is_impl":
        return [check_is(trace, "is", k=n - 1)]
    if algo == "cons_oracle":
        return [check_consensus_linearizable(trace, "cs")]
    raise ValueError(f"no standard checks for algorithm {algo!r}")


# ── Agreement matrix ─────────────────────────────────────────────────────────


@dataclass
class MatrixCell:
    t: int
    k: int
    bound: int
    observed_max: int = 0
    trials: int = 0
    violations: int = 0
    witness: Trace | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.observed_max <= self.bound

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "k": self.k,
            "bound": self.bound,
            "observed_max": self.observed_max,
            "trials": self.trials,
            "violations": self.violations,
            "ok": self.ok,
        }


@dataclass
class MatrixReport:
    n: int
    mode: str
    seed: int
    trials_per_cell: int
    cells: list[MatrixCell] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.cells)

    def cell(self, t: int, k: int) -> MatrixCell:
        for c in self.cells:
            if c.t == t and c.k == k:
                return c
        raise KeyError((t, k))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "seed": self.seed,
            "trials_per_cell": self.trials_per_cell,
            "passed": self.passed,
            "elapsed_seconds": round(self.elapsed, 3),
            "cells": [c.to_dict() for c in self.cells],
        }


def _run_cell_random(
    n: int, t: int, k: int, trials: int, seed: int, algo: str
) -> MatrixCell:
    cell = MatrixCell(t=t, k=k, bound=xsa_bound(n, t, k))
    inst = make_instance(algo, n, t, k)
    for i in range(trials):
        res = run_random(inst, trial_seed(seed, n, t, k, i))
        tr = res.trace
        if tr.truncated:
            raise RuntimeError(f"trial hit the step bound at t={t} k={k} i={i}")
        distinct = len(set(tr.decisions().values()))
        cell.trials += 1
        cell.observed_max = max(cell.observed_max, distinct)
        if distinct > cell.bound or not check_xsa(tr, cell.bound).passed:
            cell.violations += 1
            if cell.witness is None:
                cell.witness = tr
    return cell


def _run_cell_exhaustive(n: int, t: int, k: int, algo: str) -> MatrixCell:
    cell = MatrixCell(t=t, k=k, bound=xsa_bound(n, t, k))
    inst = make_instance(algo, n, t, k)
    for tr in enumerate_runs(inst, reduced=True):
        distinct = len(set(tr.decisions().values()))
        cell.trials += 1
        cell.observed_max = max(cell.observed_max, distinct)
        if distinct > cell.bound or not check_xsa(tr, cell.bound).passed:
            cell.violations += 1
            if cell.witness is None:
                cell.witness = tr
    return cell


def run_matrix(
    n: int,
    trials: int = 1000,
    seed: int = 0,
    *,
    exhaustive: bool | None = None,
    algo: str = "alg1",
    progress: bool = False,
) -> MatrixReport:
    """Sweep all cells 1 <= t <= k <= n-1 and compare against the bound.

    `exhaustive=None` picks exhaustive (reduced) enumeration for n <= 4 and
    seeded-random trials otherwise.
    """
    if exhaustive is None:
        exhaustive = n <= 4
    mode = "exhaustive" if exhaustive else "random"
    report = MatrixReport(
        n=n, mode=mode, seed=seed, trials_per_cell=0 if exhaustive else trials
    )
    start = time.time()
    for t in range(1, n):
        for k in range(t, n):
            if exhaustive:
                cell = _run_cell_exhaustive(n, t, k, algo)
            else:
                cell = _run_cell_random(n, t, k, trials, seed, algo)
            report.cells.append(cell)
            if progress:
                print(
                    f"  cell t={t} k={k}: bound={cell.bound} "
                    f"observed={cell.observed_max} trials={cell.trials} "
                    f"violations={cell.violations}",
                    flush=True,
                )
    report.elapsed = time.time() - start
    return report


def render_matrix(report: MatrixReport) -> str:
    """Text table of observed/bound per cell (rows t, columns k)."""
    n = report.n
    width = 6
    header = "t\\k".ljust(4) + "".join(str(k).rjust(width) for k in range(1, n))
    lines = [
        f"n={n} mode={report.mode} "
        f"(entries: observed max distinct decisions / bound)",
        header,
    ]
    for t in range(1, n):
        row = [str(t).ljust(4)]
        for k in range(1, n):
            if k < t:
                row.append(" " * width)
            else:
                c = report.cell(t, k)
                mark = "" if c.ok else "!"
                row.append(f"{c.observed_max}/{c.bound}{mark}".rjust(width))
        lines.append("".join(row))
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)


# ── Blocking strawman demo ───────────────────────────────────────────────────


@dataclass
class BlockingReport:
    n: int
    t: int
    k: int
    runs: list[dict] = field(default_factory=list)
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "k": self.k,
            "passed": self.passed,
            "runs": self.runs,
        }


def run_blocking_demo(
    n: int = 4, t: int = 2, k: int = 1, seeds: int = 100, base_seed: int = 0
) -> BlockingReport:
    """Demonstrate why k < t cannot be implemented without the oracle.

    For each seed, t processes crash initially and the rest run the naive
    write-then-wait k-IS attempt. With k < t the survivors wait for n-k
    published values while only n-t < n-k can ever appear, so every run must
    end quiescent with every survivor blocked and nothing decided.
    """
    report = BlockingReport(n=n, t=t, k=k)
    inst = make_instance("naive", n, t, k)
    for s in range(seeds):
        rng = random.Random(trial_seed(base_seed, "blocking", n, t, k, s))
        victims = tuple(sorted(rng.sample(range(1, n + 1), t)))
        res = run_random(
            inst,
            trial_seed(base_seed, "blocking-run", n, t, k, s),
            crash_victims=(),
            initial_crashes=victims,
        )
        tr = res.trace
        survivors = [p for p in range(1, n + 1) if p not in victims]
        all_blocked = all(tr.outcomes[p][0] == "blocked" for p in survivors)
        ok = tr.quiescent and all_blocked and not tr.decisions()
        report.runs.append(
            {
                "seed": s,
                "crashed": list(victims),
                "quiescent": tr.quiescent,
                "blocked": sorted(tr.blocked_pids()),
                "ok": ok,
            }
        )
        report.passed = report.passed and ok
    return report


# ── Consensus / k-IS equivalence suite ───────────────────────────────────────


@dataclass
class EquivalenceReport:
    n: int
    t: int
    k: int
    trials: int
    failures: list[str] = field(default_factory=list)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "k": self.k,
            "trials": self.trials,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures[:20],
        }


def equivalence_zone(n: int, t: int, k: int) -> bool:
    """The parameter zone where consensus and k-IS are interreducible:
    a minority of crashes and t <= k <= (n-1)-t."""
    return 0 < t < n / 2 and t <= k <= (n - 1) - t


def run_equivalence_suite(
    n: int = 5,
    t: int = 2,
    k: int = 2,
    trials: int = 1000,
    seed: int = 0,
) -> EquivalenceReport:
    """Exercise both reduction directions inside the equivalence zone.

    Direction A (consensus -> k-IS): every sampled run of the consensus-based
    construction must yield a history satisfying all k-IS properties and the
    minimum-view theorem. Direction B (k-IS -> consensus): every sampled run
    of the set-agreement reduction over a k-IS oracle must decide a single
    value, since t+k <= n-1 forces x = 1. The composed program (reduction
    running on the constructed object instead of the oracle) is sampled as
    well, checking both layers inside one trace.
    """
    if not equivalence_zone(n, t, k):
        raise ValueError(
            f"(n,t,k)=({n},{t},{k}) is outside the equivalence zone "
            "0 < t < n/2, t <= k <= (n-1)-t"
        )
    report = EquivalenceReport(n=n, t=t, k=k, trials=trials)
    alg2 = make_instance("alg2", n, t, k)
    alg1 = make_instance("alg1", n, t, k)
    composed = make_instance("alg1_over_alg2", n, t, k)

    count = 0
    for i in range(trials):
        tr = run_random(alg2, trial_seed(seed, "eqA", i)).trace
        for rep in (check_is(tr, "ckis", k=k), check_theorem1(tr, "ckis", k=k)):
            if not rep.passed:
                report.failures.append(f"alg2 trial {i}: {rep.failures()}")
        count += 1
    report.checked["alg2_kis_histories"] = count

    count = 0
    for i in range(trials):
        tr = run_random(alg1, trial_seed(seed, "eqB", i)).trace
        rep = check_xsa(tr, 1)
        if not rep.passed:
            report.failures.append(f"alg1 trial {i}: {rep.failures()}")
        count += 1
    report.checked["alg1_single_decision"] = count

    count = 0
    for i in range(trials):
        tr = run_random(composed, trial_seed(seed, "eqC", i)).trace
        for rep in (check_xsa(tr, 1), check_is(tr, "ckis", k=k)):
            if not rep.passed:
                report.failures.append(f"composed trial {i}: {rep.failures()}")
        count += 1
    report.checked["composed_runs"] = count
    return report
