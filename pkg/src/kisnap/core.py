"""Deterministic simulator core for the t-crash asynchronous SWMR model.

A system is an `Instance`: n processes (pids 1..n), each running a
registered step program, plus declared register arrays (one single-writer
cell per process), k-immediate-snapshot oracle objects, and consensus
objects. The scheduler-visible unit is an action:

    ("step", pid)            run the process's next enabled step
    ("commit", obj, batch)   commit a pending k-IS batch as a concurrency class
    ("crash", pid)           crash a live, unreturned process (budget t)

`apply_action` is a pure transition on immutable `World` values and returns
the emitted events, so the same core drives single seeded/replayed runs and
exhaustive enumeration. Identical (instance, schedule state) always yields a
bit-identical trace.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations
from typing import Iterator, NamedTuple

from .objects import ConsState, KisState, consensus_propose, kis_commit_batch, kis_invoke
from .primitives import (
    BOTTOM,
    Announce,
    ConsProposeStep,
    KisInvokeStep,
    ReadStep,
    ScanStep,
    WaitAnyStep,
    WriteStep,
    program_fn,
)
from .trace import BLOCKED, CRASHED, RETURNED, Event, Trace

DEFAULT_STEP_BOUND = 100_000


class SimError(ValueError):
    """Illegal instance, action, or schedule."""


# ── Instances and process programs ───────────────────────────────────────────


@dataclass(frozen=True, slots=True)
class ProgramRef:
    """Hashable reference to a registered program plus its parameters."""

    name: str
    params: tuple[tuple[str, object], ...] = ()


def make_ref(name: str, **params) -> ProgramRef:
    program_fn(name)  # fail fast on unknown names
    return ProgramRef(name, tuple(sorted(params.items())))


class Ctx(NamedTuple):
    """Read-only context every program receives."""

    n: int
    t: int
    k: int | None
    pid: int


@dataclass
class Instance:
    """A complete system description the simulator can run."""

    n: int
    t: int
    k: int | None
    programs: dict[int, ProgramRef]
    arrays: tuple[str, ...] = ()
    kis_objects: tuple[tuple[str, int, int], ...] = ()  # (obj, n_obj, k_obj)
    cons_objects: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise SimError(f"need at least 2 processes, got n={self.n}")
        if not (0 <= self.t < self.n):
            raise SimError(f"crash budget must satisfy 0 <= t < n, got t={self.t}")
        if set(self.programs) != set(range(1, self.n + 1)):
            raise SimError("programs must cover exactly pids 1..n")
        names = [o for o, _, _ in self.kis_objects]
        if len(set(names)) != len(names):
            raise SimError("duplicate k-IS object ids")

    def object_ids(self) -> set[str]:
        ids = set(self.arrays)
        ids.update(o for o, _, _ in self.kis_objects)
        ids.update(self.cons_objects)
        return ids


# ── Program state via generator replay ───────────────────────────────────────
#
# A process's program state is (ref, result history). The generator is
# rebuilt on demand by replaying the history; results are memoized globally,
# so sibling branches of an exhaustive search share the work.


@dataclass(frozen=True, slots=True)
class Peek:
    """What a program does next: pending announces, then a step or a return."""

    announces: tuple[Announce, ...]
    step: object | None  # a Step, or None when the program returned
    value: object = None  # return value, meaningful when step is None

    @property
    def done(self) -> bool:
        return self.step is None


@lru_cache(maxsize=1 << 20)
def _peek_cached(ref: ProgramRef, ctx: Ctx, history: tuple) -> Peek:
    gen = program_fn(ref.name)(ctx, **dict(ref.params))
    announces: list[Announce] = []
    consumed = 0
    try:
        item = next(gen)
        for h in history:
            while isinstance(item, Announce):
                item = gen.send(None)
            consumed += 1
            item = gen.send(h)
        while isinstance(item, Announce):
            announces.append(item)
            item = gen.send(None)
    except StopIteration as stop:
        if consumed != len(history):
            raise SimError(
                f"program {ref.name} ended before consuming its history"
            ) from None
        return Peek(tuple(announces), None, stop.value)
    return Peek(tuple(announces), item)


@dataclass(frozen=True, slots=True)
class Proc:
    ref: ProgramRef
    history: tuple = ()
    waiting: str | None = None  # k-IS object this process is parked on
    finished: bool = False
    result: object = None


@dataclass(frozen=True, slots=True)
class World:
    n: int
    t: int
    k: int | None
    procs: tuple[Proc, ...]
    regs: dict  # array -> tuple of n cells
    kis: dict  # obj -> KisState
    cons: dict  # obj -> ConsState
    crashed: frozenset[int]
    crashes_left: int

    def proc(self, pid: int) -> Proc:
        return self.procs[pid - 1]

    def alive(self, pid: int) -> bool:
        return pid not in self.crashed


def peek_of(world: World, pid: int) -> Peek:
    p = world.proc(pid)
    return _peek_cached(p.ref, Ctx(world.n, world.t, world.k, pid), p.history)


def _announce_events(announces: tuple[Announce, ...], pid: int) -> list[Event]:
    return [
        Event(
            step=-1,
            kind=a.kind,
            pid=a.pid if a.pid is not None else pid,
            obj=a.obj,
            op=a.op,
            args=a.args,
            ret=a.ret,
        )
        for a in announces
    ]


def initial_world(instance: Instance) -> tuple[World, list[Event]]:
    """Build the start state; returns it with the programs' initial events."""
    regs = {arr: (BOTTOM,) * instance.n for arr in instance.arrays}
    kis = {o: KisState(n_obj, k_obj) for o, n_obj, k_obj in instance.kis_objects}
    cons = {o: ConsState() for o in instance.cons_objects}
    procs = []
    events: list[Event] = []
    for pid in range(1, instance.n + 1):
        ref = instance.programs[pid]
        pk = _peek_cached(ref, Ctx(instance.n, instance.t, instance.k, pid), ())
        events.extend(_announce_events(pk.announces, pid))
        procs.append(
            Proc(ref, (), None, pk.done, pk.value if pk.done else None)
        )
    world = World(
        n=instance.n,
        t=instance.t,
        k=instance.k,
        procs=tuple(procs),
        regs=regs,
        kis=kis,
        cons=cons,
        crashed=frozenset(),
        crashes_left=instance.t,
    )
    return world, events


# ── Enabled actions ──────────────────────────────────────────────────────────


def current_step(world: World, pid: int):
    """The step `pid` would execute next, or None if it has none."""
    p = world.proc(pid)
    if p.finished or p.waiting is not None or pid in world.crashed:
        return None
    return peek_of(world, pid).step


def _cell(world: World, arr: str, cell: int):
    try:
        return world.regs[arr][cell - 1]
    except KeyError:
        raise SimError(f"unknown register array {arr!r}") from None


def step_guard_ok(world: World, pid: int, step) -> bool:
    if isinstance(step, ScanStep):
        cells = world.regs.get(step.array)
        if cells is None:
            raise SimError(f"unknown register array {step.array!r}")
        filled = sum(1 for c in cells if c is not BOTTOM)
        return filled >= step.min_filled
    if isinstance(step, WaitAnyStep):
        return any(_cell(world, a, c) is not BOTTOM for a, c in step.watches)
    return True


def enabled_step_actions(world: World) -> list[tuple]:
    out = []
    for pid in range(1, world.n + 1):
        step = current_step(world, pid)
        if step is not None and step_guard_ok(world, pid, step):
            out.append(("step", pid))
    return out


def commit_candidates(world: World) -> list[tuple[str, tuple[int, ...], int]]:
    """Objects with a committable pending set: (obj, pending sorted, min batch)."""
    out = []
    for obj in sorted(world.kis):
        st = world.kis[obj]
        if not st.pending:
            continue
        need = st.min_batch_size()
        if need <= len(st.pending):
            out.append((obj, tuple(sorted(st.pending)), need))
    return out


def enabled_commit_actions(world: World) -> list[tuple]:
    out = []
    for obj, pending, need in commit_candidates(world):
        for size in range(need, len(pending) + 1):
            for batch in combinations(pending, size):
                out.append(("commit", obj, batch))
    return out


def crash_candidates(world: World) -> list[int]:
    if world.crashes_left <= 0:
        return []
    return [
        pid
        for pid in range(1, world.n + 1)
        if pid not in world.crashed and not world.proc(pid).finished
    ]


# ── Action application ───────────────────────────────────────────────────────


def _advance(world: World, procs: list[Proc], pid: int, result) -> list[Event]:
    """Feed a step result to `pid`'s program; returns its announce events."""
    p = procs[pid - 1]
    history = p.history + (result,)
    pk = _peek_cached(p.ref, Ctx(world.n, world.t, world.k, pid), history)
    events = _announce_events(pk.announces, pid)
    procs[pid - 1] = Proc(
        ref=p.ref,
        history=history,
        waiting=None,
        finished=pk.done,
        result=pk.value if pk.done else None,
    )
    return events


def apply_action(world: World, action: tuple) -> tuple[World, list[Event]]:
    kind = action[0]
    if kind == "step":
        return _apply_step(world, action[1])
    if kind == "commit":
        return _apply_commit(world, action[1], tuple(action[2]))
    if kind == "crash":
        return _apply_crash(world, action[1])
    raise SimError(f"unknown action {action!r}")


def _apply_step(world: World, pid: int) -> tuple[World, list[Event]]:
    step = current_step(world, pid)
    if step is None:
        raise SimError(f"process {pid} has no enabled step")
    if not step_guard_ok(world, pid, step):
        raise SimError(f"step guard not satisfied for process {pid}: {step}")
    procs = list(world.procs)
    events: list[Event]

    if isinstance(step, WriteStep):
        cells = world.regs[step.array]
        idx = pid - 1
        regs = {**world.regs, step.array: cells[:idx] + (step.value,) + cells[idx + 1 :]}
        events = [Event(-1, "reg_write", pid, step.array, "write", step.value)]
        events += _advance(world, procs, pid, None)
        return replace(world, procs=tuple(procs), regs=regs), events

    if isinstance(step, ScanStep):
        cells = world.regs[step.array]
        events = [Event(-1, "reg_read", pid, step.array, "scan", None, cells)]
        events += _advance(world, procs, pid, cells)
        return replace(world, procs=tuple(procs)), events

    if isinstance(step, ReadStep):
        val = _cell(world, step.array, step.cell)
        events = [Event(-1, "reg_read", pid, step.array, "read", step.cell, val)]
        events += _advance(world, procs, pid, val)
        return replace(world, procs=tuple(procs)), events

    if isinstance(step, WaitAnyStep):
        vals = tuple(_cell(world, a, c) for a, c in step.watches)
        events = [
            Event(-1, "reg_read", pid, a, "read", c, v)
            for (a, c), v in zip(step.watches, vals)
        ]
        events += _advance(world, procs, pid, vals)
        return replace(world, procs=tuple(procs)), events

    if isinstance(step, KisInvokeStep):
        try:
            st = world.kis[step.obj]
        except KeyError:
            raise SimError(f"unknown k-IS object {step.obj!r}") from None
        new_st = kis_invoke(st, pid, step.value)
        kis = {**world.kis, step.obj: new_st}
        p = procs[pid - 1]
        procs[pid - 1] = replace(p, waiting=step.obj)
        events = [
            Event(-1, "invoke", pid, step.obj, "write_snapshot_k", step.value)
        ]
        return replace(world, procs=tuple(procs), kis=kis), events

    if isinstance(step, ConsProposeStep):
        try:
            st = world.cons[step.obj]
        except KeyError:
            raise SimError(f"unknown consensus object {step.obj!r}") from None
        new_st, decided = consensus_propose(st, pid, step.value)
        cons = {**world.cons, step.obj: new_st}
        events = [
            Event(-1, "invoke", pid, step.obj, "propose", step.value),
            Event(-1, "respond", pid, step.obj, "propose", None, decided),
        ]
        events += _advance(world, procs, pid, decided)
        return replace(world, procs=tuple(procs), cons=cons), events

    raise SimError(f"process {pid} yielded an unknown step {step!r}")


def _apply_commit(
    world: World, obj: str, batch: tuple[int, ...]
) -> tuple[World, list[Event]]:
    try:
        st = world.kis[obj]
    except KeyError:
        raise SimError(f"unknown k-IS object {obj!r}") from None
    new_st, view, releases = kis_commit_batch(st, batch, world.crashed)
    kis = {**world.kis, obj: new_st}
    events = [
        Event(-1, "commit_batch", None, obj, "commit", tuple(sorted(batch)), view)
    ]
    procs = list(world.procs)
    for pid, delivered in releases:
        if world.proc(pid).waiting != obj:
            raise SimError(f"process {pid} is not parked on {obj!r}")
        events.append(
            Event(-1, "respond", pid, obj, "write_snapshot_k", None, delivered)
        )
        events += _advance(world, procs, pid, delivered)
    return replace(world, procs=tuple(procs), kis=kis), events


def _apply_crash(world: World, pid: int) -> tuple[World, list[Event]]:
    if world.crashes_left <= 0:
        raise SimError("crash budget exhausted")
    if pid in world.crashed:
        raise SimError(f"process {pid} already crashed")
    if world.proc(pid).finished:
        raise SimError(f"process {pid} already returned; crash is a no-op")
    return (
        replace(
            world,
            crashed=world.crashed | {pid},
            crashes_left=world.crashes_left - 1,
        ),
        [Event(-1, "crash", pid)],
    )


# ── Schedules ────────────────────────────────────────────────────────────────


class RandomSchedule:
    """Seeded adversary: uniform over enabled non-crash actions plus the
    pending crashes of its designated victims. Commit batches are sampled
    (object, then size, then members) rather than enumerated."""

    def __init__(self, rng: random.Random, crash_victims: tuple[int, ...] = ()):
        self.rng = rng
        self.victims = tuple(crash_victims)

    def choose(self, world: World) -> tuple | None:
        steps = enabled_step_actions(world)
        commits = commit_candidates(world)
        if not steps and not commits:
            return None
        crashables = set(crash_candidates(world))
        crashes = [("crash", p) for p in self.victims if p in crashables]
        menu: list[tuple] = list(steps)
        menu += [("commit?", obj, pending, need) for obj, pending, need in commits]
        menu += crashes
        pick = menu[self.rng.randrange(len(menu))]
        if pick[0] != "commit?":
            return pick
        _, obj, pending, need = pick
        size = self.rng.randint(need, len(pending))
        batch = tuple(sorted(self.rng.sample(pending, size)))
        return ("commit", obj, batch)


class ReplaySchedule:
    """Plays back a recorded action list; raises on illegal actions."""

    def __init__(self, actions: list[tuple]):
        self.actions = list(actions)
        self.pos = 0

    def choose(self, world: World) -> tuple | None:
        if self.pos >= len(self.actions):
            return None
        action = self.actions[self.pos]
        self.pos += 1
        return action


# ── Run loop ─────────────────────────────────────────────────────────────────


@dataclass
class RunResult:
    trace: Trace
    world: World
    actions: list[tuple]


def _stamp(events: list[Event], new_events: list[Event]) -> None:
    base = len(events)
    for i, e in enumerate(new_events):
        e.step = base + i
    events.extend(new_events)


def outcomes_of(world: World) -> dict[int, tuple]:
    out: dict[int, tuple] = {}
    for pid in range(1, world.n + 1):
        p = world.proc(pid)
        if pid in world.crashed:
            out[pid] = (CRASHED,)
        elif p.finished:
            out[pid] = (RETURNED, p.result)
        else:
            out[pid] = (BLOCKED,)
    return out


def finalize_trace(
    world: World,
    events: list[Event],
    *,
    truncated: bool = False,
    meta: dict | None = None,
) -> Trace:
    """Close a run: compute outcomes, emit blocked events on quiescence.

    A truncated run (step bound hit) also marks unfinished processes as
    blocked in the outcomes but is flagged `truncated`, not `quiescent`.
    """
    outcomes = outcomes_of(world)
    blocked = sorted(p for p, o in outcomes.items() if o[0] == BLOCKED)
    quiescent = bool(blocked) and not truncated
    if quiescent:
        _stamp(events, [Event(-1, "blocked", pid) for pid in blocked])
    return Trace(
        n=world.n,
        t=world.t,
        k=world.k,
        events=events,
        outcomes=outcomes,
        truncated=truncated,
        quiescent=quiescent,
        meta=dict(meta or {}),
    )


def run(
    instance: Instance,
    schedule,
    *,
    initial_crashes: tuple[int, ...] = (),
    step_bound: int = DEFAULT_STEP_BOUND,
) -> RunResult:
    """Run one schedule to quiescence/completion (or the step bound)."""
    world, init_events = initial_world(instance)
    events: list[Event] = []
    _stamp(events, init_events)
    actions: list[tuple] = []
    for pid in initial_crashes:
        world, evs = apply_action(world, ("crash", pid))
        _stamp(events, evs)
        actions.append(("crash", pid))
    truncated = False
    while True:
        if len(events) > step_bound:
            truncated = True
            break
        action = schedule.choose(world)
        if action is None:
            break
        world, evs = apply_action(world, action)
        _stamp(events, evs)
        actions.append(action)
    trace = finalize_trace(
        world, events, truncated=truncated, meta=instance.meta
    )
    return RunResult(trace=trace, world=world, actions=actions)


def run_random(
    instance: Instance,
    seed: int,
    *,
    crash_victims: tuple[int, ...] | None = None,
    max_crashes: int | None = None,
    initial_crashes: tuple[int, ...] = (),
    step_bound: int = DEFAULT_STEP_BOUND,
) -> RunResult:
    """Seeded random run; samples crash count and victims unless given."""
    rng = random.Random(seed)
    if crash_victims is None:
        budget = instance.t - len(initial_crashes)
        limit = budget if max_crashes is None else min(max_crashes, budget)
        count = rng.randint(0, limit) if limit > 0 else 0
        pool = [p for p in range(1, instance.n + 1) if p not in initial_crashes]
        crash_victims = tuple(sorted(rng.sample(pool, count))) if count else ()
    schedule = RandomSchedule(rng, crash_victims)
    return run(
        instance,
        schedule,
        initial_crashes=initial_crashes,
        step_bound=step_bound,
    )
