"""Deterministic parallel mapping helpers.

Work units are fixed independently of the worker count and results are
reduced in submission order, so any thread setting yields identical output.
"""

from __future__ import annotations

import multiprocessing
import os


def resolve_threads(explicit: int | None = None) -> int:
    """Worker count: explicit argument, else RDGAP_THREADS, else cpu count."""
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get("RDGAP_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def ordered_map(fn, items, threads: int) -> list:
    """map(fn, items) preserving order, optionally in a process pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    ctx = multiprocessing.get_context("fork" if os.name == "posix" else "spawn")
    with ctx.Pool(processes=min(threads, len(items))) as pool:
        return pool.map(fn, items)
