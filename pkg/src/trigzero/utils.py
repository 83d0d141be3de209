"""Shared plumbing: thread-pool map and round-trip numeric formatting."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor


def thread_budget():
    """Worker count, capped by the TRIGZERO_THREADS environment variable."""
    cap = os.environ.get("TRIGZERO_THREADS", "")
    default = min(8, os.cpu_count() or 1)
    if cap.strip():
        try:
            return max(1, min(default, int(cap)))
        except ValueError:
            return default
    return default


def parallel_map(fn, items):
    """Ordered map over items; results are merged in index order so any
    reduction downstream is deterministic."""
    items = list(items)
    workers = thread_budget()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt(value):
    """Full round-trip decimal formatting for CSV cells."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return ""
    return str(value)


def json_sanitize(obj):
    """Replace non-finite floats by strings so JSON stays standard."""
    if isinstance(obj, dict):
        return {k: json_sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj
