"""Shared test fixtures: tiny step programs for engine-level tests.

Registered here once so every test module can build instances with
`make_ref` without tripping the duplicate-registration guard.
"""

from __future__ import annotations

from kisnap import Instance, WriteStep, ScanStep, make_ref
from kisnap.primitives import register_program


@register_program("toy_one_write")
def toy_one_write(ctx, value):
    """Write one value to the own cell, return it."""
    yield WriteStep("a", value)
    return value


@register_program("toy_two_writes")
def toy_two_writes(ctx, value):
    """Two writes to own cells of two arrays; fully independent across pids."""
    yield WriteStep("a", value)
    yield WriteStep("b", value + 1)
    return value


@register_program("toy_write_scan")
def toy_write_scan(ctx, value):
    """Write own value, then scan: the classic order-sensitive pair."""
    yield WriteStep("a", value)
    cells = yield ScanStep("a")
    return cells


def toy_instance(name: str, n: int = 2, t: int = 0, arrays=("a", "b")) -> Instance:
    programs = {pid: make_ref(name, value=10 * pid) for pid in range(1, n + 1)}
    return Instance(n, t, None, programs, arrays=arrays, meta={"algo": "toy"})
