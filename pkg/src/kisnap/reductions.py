"""Reduction algorithms between k-immediate snapshot, x-set agreement, and
consensus, written as step programs for the simulator core.

* `alg1_xsa`: x-set agreement from one k-IS object. Each process passes its
  proposal through the k-IS object, publishes the view it got, waits until
  at least n-t views are published, and decides the smallest value in the
  smallest published view. The achievable agreement degree is
  `xsa_bound(n, t, k) = max(1, t + k - (n - 2))`.
* `alg1_variant_xsa`: same guarantee from two k-IS objects and no register
  wait: the second object snapshots the views produced by the first, and a
  process decides in the smallest view found inside its second view.
* `alg2_kis`: a k-IS object from one consensus object plus a register-level
  immediate snapshot, for t <= k. Processes publish their proposals, a
  consensus instance fixes a base view of at least n-k published pairs, and
  processes missing from the base view merge in their own immediate
  snapshot before returning.
* `naive_kis`: the blocking strawman (publish, then wait for n-k cells);
  with k < t it waits forever once more than k processes crash.

SWMR cells hold whatever a program writes; views are frozensets of
(pid, value) pairs, so views of views nest without special cases.
"""

from __future__ import annotations

from .core import Instance, make_ref
from .objects import is_array, is_write_snapshot
from .primitives import (
    BOTTOM,
    Announce,
    ConsProposeStep,
    KisInvokeStep,
    ScanStep,
    WriteStep,
    register_program,
)

XSA_OBJ = "xsa"  # object id under which decisions appear in traces


def xsa_bound(n: int, t: int, k: int) -> int:
    """Agreement degree x of the k-IS-to-x-SA reduction: max(1, t+k-(n-2)).

    Preconditions: n >= 3 and 1 <= t <= k <= n-1.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not (1 <= t <= k <= n - 1):
        raise ValueError(f"need 1 <= t <= k <= n-1, got t={t} k={k} n={n}")
    return max(1, t + k - (n - 2))


def _smallest_view(views):
    """Smallest-cardinality view; equal-cardinality views must be identical
    (guaranteed by view containment), which removes any need to tie-break."""
    best = min(views, key=len)
    for w in views:
        if len(w) == len(best) and w != best:
            raise AssertionError(
                f"equal-size views differ: {sorted(w)} vs {sorted(best)}"
            )
    return best


def _min_value(view):
    return min(v for _, v in view)


@register_program("alg1_xsa")
def alg1_xsa(ctx, value):
    """x-set agreement from one k-IS object (object ids: kis, view array)."""
    yield Announce("invoke", XSA_OBJ, "propose", args=value)
    view = yield KisInvokeStep("kis", value)
    yield WriteStep("view", view)
    cells = yield ScanStep("view", min_filled=ctx.n - ctx.t)
    views = [c for c in cells if c is not BOTTOM]
    decision = _min_value(_smallest_view(views))
    yield Announce("respond", XSA_OBJ, "propose", ret=decision)
    return decision


@register_program("alg1_variant_xsa")
def alg1_variant_xsa(ctx, value):
    """x-set agreement from two k-IS objects, no register wait.

    The first object turns proposals into views; the second snapshots those
    views. View containment on the first object makes the smallest view
    inside any second-level view unique, and every process holds at least
    n-k >= n-t first-level views in its second view, so the smallest-view
    argument goes through exactly as with the register-wait version.
    """
    yield Announce("invoke", XSA_OBJ, "propose", args=value)
    view1 = yield KisInvokeStep("kis1", value)
    view2 = yield KisInvokeStep("kis2", view1)
    decision = _min_value(_smallest_view([w for _, w in view2]))
    yield Announce("respond", XSA_OBJ, "propose", ret=decision)
    return decision


@register_program("alg2_kis")
def alg2_kis(ctx, value):
    """k-IS from consensus plus register-level immediate snapshot."""
    view = yield from alg2_kis_body(ctx, value)
    return view


def alg2_kis_body(ctx, value, out_obj: str = "ckis"):
    """Reusable body of the consensus-based k-IS construction.

    Emits the emulated object's invoke/respond events under `out_obj` so the
    produced trace contains a checkable k-IS history.
    """
    yield Announce("invoke", out_obj, "write_snapshot_k", args=value)
    yield WriteStep("reg", value)
    cells = yield ScanStep("reg", min_filled=ctx.n - ctx.k)
    aux = frozenset(
        (j, c) for j, c in enumerate(cells, start=1) if c is not BOTTOM
    )
    view = yield ConsProposeStep("cs", aux)
    if (ctx.pid, value) not in view:
        extra = yield from is_write_snapshot(ctx, "is", value)
        view = frozenset(view | extra)
    yield Announce("respond", out_obj, "write_snapshot_k", ret=view)
    return view


@register_program("naive_kis")
def naive_kis(ctx, value):
    """Blocking strawman: write, then wait for n-k published values.

    Correct while at most k processes crash; with more than k crashes the
    scan guard can never be met and every survivor blocks, which is exactly
    the obstruction the k-IS oracle's batch gate models away.
    """
    yield Announce("invoke", "nkis", "write_snapshot_k", args=value)
    yield WriteStep("reg", value)
    cells = yield ScanStep("reg", min_filled=ctx.n - ctx.k)
    view = frozenset(
        (j, c) for j, c in enumerate(cells, start=1) if c is not BOTTOM
    )
    yield Announce("respond", "nkis", "write_snapshot_k", ret=view)
    return view


@register_program("alg1_over_alg2_xsa")
def alg1_over_alg2_xsa(ctx, value):
    """Composition: the x-SA reduction running on the emulated k-IS object.

    Exercises the equivalence direction "consensus + IS implement k-IS,
    which implements 1-set agreement" inside a single run: the trace then
    carries both a k-IS history (obj ckis) and a decision history (obj xsa).
    """
    yield Announce("invoke", XSA_OBJ, "propose", args=value)
    view = yield from alg2_kis_body(ctx, value)
    yield WriteStep("view", view)
    cells = yield ScanStep("view", min_filled=ctx.n - ctx.t)
    views = [c for c in cells if c is not BOTTOM]
    decision = _min_value(_smallest_view(views))
    yield Announce("respond", XSA_OBJ, "propose", ret=decision)
    return decision


# ── Instance builders ────────────────────────────────────────────────────────

ALGORITHMS = (
    "alg1",
    "alg1_variant",
    "alg2",
    "naive",
    "alg1_over_alg2",
    "kis_oracle",
    "is_impl",
    "cons_oracle",
)


def default_inputs(n: int) -> tuple[int, ...]:
    """Distinct per-process proposals: pid i proposes 100+i."""
    return tuple(100 + i for i in range(1, n + 1))


def make_instance(
    algo: str,
    n: int,
    t: int,
    k: int | None,
    inputs: tuple | None = None,
    *,
    enforce_paper_ranges: bool = True,
) -> Instance:
    """Build a runnable instance of one of the catalog algorithms.

    `enforce_paper_ranges=False` relaxes the n >= 3, t >= 1 validation for
    engine-level experiments (e.g. wait-free IS runs with crash budget 0).
    """
    if inputs is None:
        inputs = default_inputs(n)
    if len(inputs) != n:
        raise ValueError(f"need {n} inputs, got {len(inputs)}")
    if enforce_paper_ranges:
        if n < 3:
            raise ValueError(f"need n >= 3, got {n}")
        if algo == "naive":
            # The strawman exists to be run outside the t <= k zone.
            if k is None or not (1 <= k <= n - 1):
                raise ValueError(f"need 1 <= k <= n-1, got k={k} n={n}")
        elif algo not in ("is_impl", "cons_oracle") and not (
            1 <= t <= (k if k is not None else n - 1) <= n - 1
        ):
            raise ValueError(f"need 1 <= t <= k <= n-1, got t={t} k={k} n={n}")

    meta = {"algo": algo, "inputs": list(inputs)}
    programs = {}
    if algo == "alg1":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("alg1_xsa", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            arrays=("view",),
            kis_objects=(("kis", n, k),),
            meta={**meta, "objects": ["kis", "view", XSA_OBJ]},
        )
    if algo == "alg1_variant":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("alg1_variant_xsa", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            kis_objects=(("kis1", n, k), ("kis2", n, k)),
            meta={**meta, "objects": ["kis1", "kis2", XSA_OBJ]},
        )
    if algo == "alg2":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("alg2_kis", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            arrays=("reg", is_array("is")),
            cons_objects=("cs",),
            meta={**meta, "objects": ["reg", "cs", "is", "ckis"]},
        )
    if algo == "naive":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("naive_kis", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            arrays=("reg",),
            meta={**meta, "objects": ["reg", "nkis"]},
        )
    if algo == "alg1_over_alg2":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("alg1_over_alg2_xsa", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            arrays=("reg", is_array("is"), "view"),
            cons_objects=("cs",),
            meta={**meta, "objects": ["reg", "cs", "is", "ckis", "view", XSA_OBJ]},
        )
    if algo == "kis_oracle":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("kis_once", obj="kis", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            kis_objects=(("kis", n, k),),
            meta={**meta, "objects": ["kis"]},
        )
    if algo == "is_impl":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("is_once", obj="is", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            arrays=(is_array("is"),),
            meta={**meta, "objects": ["is"]},
        )
    if algo == "cons_oracle":
        for pid in range(1, n + 1):
            programs[pid] = make_ref("cons_once", obj="cs", value=inputs[pid - 1])
        return Instance(
            n, t, k, programs,
            cons_objects=("cs",),
            meta={**meta, "objects": ["cs"]},
        )
    raise ValueError(f"unknown algorithm {algo!r}; known: {ALGORITHMS}")
