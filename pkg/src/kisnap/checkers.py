"""Trace checkers for the formal properties of the simulated objects.

Each checker consumes a trace (fresh from the simulator or loaded from
JSONL), extracts the per-object history of invoke/respond/crash events, and
returns a `CheckReport` of named verdicts, each carrying a concrete witness
when it fails:

* `check_is`: the five immediate-snapshot properties (Termination,
  Self-inclusion, Validity, Containment, Immediacy) plus the k-IS Output
  size bound when `k` is given. Immediacy is evaluated both in its primal
  form ((i,-) in view_j implies view_i subseteq view_j) and in the
  symmetric form (mutual membership implies equal views); whenever
  self-inclusion, validity, and containment hold the two are equivalent and
  the checker asserts they agree.
* `check_theorem1`: the minimum-view theorem: the smallest returned view has
  at least n-k members, and each of its members either returned exactly that
  view or crashed during its invocation.
* `check_xsa`: x-set agreement (Validity, Agreement with bound x,
  Termination of correct processes).
* `check_consensus_linearizable`: all responses carry one common value,
  proposed by a process whose invocation does not follow the first response.

`validate_trace` checks trace well-formedness itself (monotone steps,
respond-after-invoke, crash budget, SWMR register read consistency).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .primitives import BOTTOM
from .trace import INNER_PREFIX, Trace


@dataclass(frozen=True, slots=True)
class Verdict:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


PASS = Verdict(True)


def _fail(witness: str) -> Verdict:
    return Verdict(False, witness)


@dataclass
class CheckReport:
    obj: str
    kind: str
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.ok for v in self.verdicts.values())

    def failures(self) -> dict[str, str]:
        return {
            name: v.witness or "" for name, v in self.verdicts.items() if not v.ok
        }

    def to_dict(self) -> dict:
        return {
            "obj": self.obj,
            "kind": self.kind,
            "passed": self.passed,
            "verdicts": {
                name: {"ok": v.ok, "witness": v.witness}
                for name, v in self.verdicts.items()
            },
            "notes": self.notes,
        }

    def __str__(self) -> str:
        lines = [f"[{self.kind}] object {self.obj}: "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        for name, v in self.verdicts.items():
            mark = "pass" if v.ok else "FAIL"
            suffix = f" -- {v.witness}" if v.witness else ""
            lines.append(f"  {name}: {mark}{suffix}")
        return "\n".join(lines)


# ── History extraction ───────────────────────────────────────────────────────


@dataclass
class ObjHistory:
    """Invoke/respond/crash record of one object in one trace."""

    obj: str
    n: int
    invokes: dict[int, tuple[object, int]] = field(default_factory=dict)
    responds: dict[int, tuple[object, int]] = field(default_factory=dict)
    crashes: dict[int, int] = field(default_factory=dict)
    double_invokes: list[int] = field(default_factory=list)

    def view_of(self, pid: int):
        return self.responds[pid][0]

    def responders(self) -> list[int]:
        return sorted(self.responds)

    def views(self) -> list[frozenset]:
        return [self.responds[p][0] for p in sorted(self.responds)]


def object_history(trace: Trace, obj: str) -> ObjHistory:
    """Extract one object's history; raises on object ids the trace has
    never heard of (neither in events nor declared in meta['objects'])."""
    h = ObjHistory(obj=obj, n=trace.n)
    mentioned = False
    for e in trace.events:
        if e.kind == "crash":
            h.crashes.setdefault(e.pid, e.step)
            continue
        if e.obj != obj:
            continue
        mentioned = True
        if e.kind == "invoke":
            if e.pid in h.invokes:
                h.double_invokes.append(e.pid)
            else:
                h.invokes[e.pid] = (e.args, e.step)
        elif e.kind == "respond":
            h.responds[e.pid] = (e.ret, e.step)
    declared = set(trace.meta.get("objects", ()))
    if not mentioned and obj not in declared:
        raise ValueError(
            f"unknown object id {obj!r}: no events and not declared in trace meta"
        )
    return h


# ── Immediate snapshot / k-IS ────────────────────────────────────────────────


def _check_termination(h: ObjHistory) -> Verdict:
    for pid in sorted(h.invokes):
        if pid not in h.responds and pid not in h.crashes:
            return _fail(
                f"process {pid} invoked {h.obj} and neither responded nor crashed"
            )
    return PASS


def _check_self_inclusion(h: ObjHistory) -> Verdict:
    for pid in h.responders():
        value = h.invokes.get(pid, (None, None))[0]
        if pid not in h.invokes:
            return _fail(f"process {pid} responded on {h.obj} without invoking")
        view = h.view_of(pid)
        if (pid, value) not in view:
            return _fail(
                f"view of process {pid} misses its own pair ({pid}, {value!r}): "
                f"{sorted(view)}"
            )
    return PASS


def _check_validity(h: ObjHistory) -> Verdict:
    for pid in h.responders():
        for j, v in sorted(h.view_of(pid)):
            if j not in h.invokes:
                return _fail(
                    f"view of process {pid} contains ({j}, {v!r}) but {j} never invoked"
                )
            if h.invokes[j][0] != v:
                return _fail(
                    f"view of process {pid} contains ({j}, {v!r}) but {j} "
                    f"invoked with {h.invokes[j][0]!r}"
                )
    return PASS


def _check_containment(h: ObjHistory) -> Verdict:
    views = sorted(set(h.views()), key=len)
    for a, b in zip(views, views[1:]):
        if not a <= b:
            return _fail(
                f"incomparable views {sorted(a)} and {sorted(b)}"
            )
    return PASS


def _check_immediacy_primal(h: ObjHistory) -> Verdict:
    for j in h.responders():
        view_j = h.view_of(j)
        members = {p for p, _ in view_j}
        for i in h.responders():
            if i in members and not (h.view_of(i) <= view_j):
                return _fail(
                    f"({i},-) in view of {j} but view of {i} not contained: "
                    f"{sorted(h.view_of(i))} vs {sorted(view_j)}"
                )
    return PASS


def _check_immediacy_symmetric(h: ObjHistory) -> Verdict:
    for i in h.responders():
        vi = h.view_of(i)
        mi = {p for p, _ in vi}
        for j in h.responders():
            if j <= i:
                continue
            vj = h.view_of(j)
            mj = {p for p, _ in vj}
            if i in mj and j in mi and vi != vj:
                return _fail(
                    f"processes {i} and {j} see each other but views differ: "
                    f"{sorted(vi)} vs {sorted(vj)}"
                )
    return PASS


def _check_output_size(h: ObjHistory, n: int, k: int) -> Verdict:
    for pid in h.responders():
        view = h.view_of(pid)
        if len(view) < n - k:
            return _fail(
                f"view of process {pid} has {len(view)} < n-k = {n - k} pairs: "
                f"{sorted(view)}"
            )
    return PASS


def check_is(trace: Trace, obj: str, k: int | None = None) -> CheckReport:
    """Check the immediate-snapshot properties of `obj`'s history.

    With `k` given, additionally checks the k-IS Output-size bound
    |view| >= n-k. Immediacy is reported in its primal form; the symmetric
    form is evaluated as well and, whenever self-inclusion, validity, and
    containment all hold (which makes the two forms logically equivalent),
    a disagreement between them is raised as a checker defect rather than
    reported as a property failure.
    """
    h = object_history(trace, obj)
    report = CheckReport(obj=obj, kind="is" if k is None else f"{k}-is")
    if h.double_invokes:
        report.verdicts["one_shot"] = _fail(
            f"processes invoked twice: {sorted(set(h.double_invokes))}"
        )
    report.verdicts["termination"] = _check_termination(h)
    report.verdicts["self_inclusion"] = _check_self_inclusion(h)
    report.verdicts["validity"] = _check_validity(h)
    report.verdicts["containment"] = _check_containment(h)
    primal = _check_immediacy_primal(h)
    symmetric = _check_immediacy_symmetric(h)
    report.verdicts["immediacy"] = primal
    report.verdicts["immediacy_symmetric"] = symmetric
    base_ok = all(
        report.verdicts[name].ok
        for name in ("self_inclusion", "validity", "containment")
    )
    if base_ok and primal.ok != symmetric.ok:
        raise AssertionError(
            "immediacy forms disagree on a containment-clean history: "
            f"primal={primal}, symmetric={symmetric}"
        )
    if k is not None:
        report.verdicts["output_size"] = _check_output_size(h, trace.n, k)
    if not h.invokes:
        report.notes.append("no invocations: properties hold vacuously")
    return report


def check_theorem1(trace: Trace, obj: str, k: int) -> CheckReport:
    """Minimum-view theorem: at least n-k processes share the smallest view.

    Checks that the smallest returned view S has |S| >= n-k and that every
    process appearing in S either returned exactly S or crashed during its
    invocation (invoked, never responded, crash event present).
    """
    h = object_history(trace, obj)
    report = CheckReport(obj=obj, kind="theorem1")
    if not h.responds:
        report.notes.append("no responses: theorem holds vacuously")
        report.verdicts["min_view_size"] = PASS
        report.verdicts["min_view_members"] = PASS
        return report
    views = h.views()
    min_view = min(views, key=len)
    equal_size = [w for w in views if len(w) == len(min_view)]
    if any(w != min_view for w in equal_size):
        report.verdicts["min_view_size"] = _fail(
            "equal-size returned views differ; containment is violated"
        )
        report.verdicts["min_view_members"] = _fail("no unique smallest view")
        return report
    if len(min_view) < trace.n - k:
        report.verdicts["min_view_size"] = _fail(
            f"smallest view has {len(min_view)} < n-k = {trace.n - k} members: "
            f"{sorted(min_view)}"
        )
    else:
        report.verdicts["min_view_size"] = PASS
    bad = []
    for pid, _v in sorted(min_view):
        if pid in h.responds:
            if h.view_of(pid) != min_view:
                bad.append(
                    f"{pid} returned {sorted(h.view_of(pid))} != smallest view"
                )
        elif pid in h.invokes:
            if pid not in h.crashes:
                bad.append(f"{pid} is in the smallest view, alive, unreturned")
        else:
            bad.append(f"{pid} is in the smallest view but never invoked")
    report.verdicts["min_view_members"] = (
        PASS if not bad else _fail("; ".join(bad))
    )
    return report


# ── x-set agreement and consensus ────────────────────────────────────────────


def check_xsa(trace: Trace, x: int, obj: str = "xsa") -> CheckReport:
    """x-set agreement over the decision history published under `obj`."""
    h = object_history(trace, obj)
    report = CheckReport(obj=obj, kind=f"{x}-sa")
    proposed = {args for args, _ in h.invokes.values()}
    decisions = {pid: ret for pid, (ret, _) in h.responds.items()}
    bad = [
        f"process {pid} decided {v!r} which nobody proposed"
        for pid, v in sorted(decisions.items())
        if v not in proposed
    ]
    report.verdicts["validity"] = PASS if not bad else _fail("; ".join(bad))
    distinct = sorted(set(decisions.values()), key=repr)
    report.verdicts["agreement"] = (
        PASS
        if len(distinct) <= x
        else _fail(f"{len(distinct)} > x = {x} distinct decisions: {distinct}")
    )
    report.verdicts["termination"] = _check_termination(h)
    return report


def check_consensus_linearizable(trace: Trace, obj: str) -> CheckReport:
    """Consensus history check: single decided value, linearizable choice.

    Agreement: all responses carry the same value. Validity: that value was
    proposed. Linearizability of the winning proposal: some process proposed
    it at an invocation that does not come after the first response, so the
    decision point can be placed inside every operation's interval.
    """
    h = object_history(trace, obj)
    report = CheckReport(obj=obj, kind="consensus")
    report.verdicts["termination"] = _check_termination(h)
    if not h.responds:
        report.verdicts["agreement"] = PASS
        report.verdicts["validity"] = PASS
        report.notes.append("no responses: agreement holds vacuously")
        return report
    values = {ret for ret, _ in h.responds.values()}
    if len(values) > 1:
        report.verdicts["agreement"] = _fail(
            f"distinct decisions: {sorted(values, key=repr)}"
        )
    else:
        report.verdicts["agreement"] = PASS
    decided = next(iter(values))
    first_respond = min(step for _, step in h.responds.values())
    proposers = [
        pid
        for pid, (args, step) in h.invokes.items()
        if args == decided and step <= first_respond
    ]
    if not proposers:
        late = [
            pid for pid, (args, _) in h.invokes.items() if args == decided
        ]
        if late:
            report.verdicts["validity"] = _fail(
                f"decided {decided!r} was proposed only after the first response"
            )
        else:
            report.verdicts["validity"] = _fail(
                f"decided {decided!r} was never proposed"
            )
    else:
        report.verdicts["validity"] = PASS
    return report


# ── Trace well-formedness ────────────────────────────────────────────────────


def validate_trace(trace: Trace) -> list[str]:
    """Structural invariants of a trace; returns a list of violations.

    Covers monotone step indices, event kinds, respond-after-invoke per
    (pid, obj), the crash budget, silence of crashed processes, and SWMR
    register semantics (every read/scan returns exactly the latest writes).
    """
    problems: list[str] = []
    last_step = -1
    crashed: set[int] = set()
    invoked: set[tuple[int, str]] = set()
    regs: dict[str, dict[int, object]] = {}
    for e in trace.events:
        if e.step <= last_step:
            problems.append(f"step {e.step} not increasing after {last_step}")
        last_step = e.step
        if e.obj is not None and e.obj.startswith(INNER_PREFIX):
            # Embedded events from a simulated system: their pids live in a
            # different namespace, so the per-pid rules do not apply here.
            continue
        if e.pid is not None and e.pid in crashed:
            problems.append(f"step {e.step}: crashed process {e.pid} acts ({e.kind})")
        if e.kind == "crash":
            if e.pid in crashed:
                problems.append(f"step {e.step}: process {e.pid} crashes twice")
            crashed.add(e.pid)
        elif e.kind == "invoke":
            invoked.add((e.pid, e.obj))
        elif e.kind == "respond":
            if (e.pid, e.obj) not in invoked:
                problems.append(
                    f"step {e.step}: respond by {e.pid} on {e.obj} without invoke"
                )
        elif e.kind == "reg_write":
            regs.setdefault(e.obj, {})[e.pid] = e.args
        elif e.kind == "reg_read":
            cells = regs.get(e.obj, {})
            if e.op == "scan":
                expect = tuple(
                    cells.get(pid, BOTTOM) for pid in range(1, trace.n + 1)
                )
                if tuple(e.ret) != expect:
                    problems.append(
                        f"step {e.step}: scan of {e.obj} returned {e.ret}, "
                        f"registers hold {expect}"
                    )
            elif e.op == "read":
                expect = cells.get(e.args, BOTTOM)
                if e.ret != expect:
                    problems.append(
                        f"step {e.step}: read of {e.obj}[{e.args}] returned "
                        f"{e.ret!r}, register holds {expect!r}"
                    )
    if len(crashed) > trace.t:
        problems.append(f"{len(crashed)} crashes exceed budget t={trace.t}")
    return problems
