import os
from typing import Optional


def worker_count(requested: Optional[int] = None) -> int:
    """Requested workers (default: all CPUs), capped by ``FILTERKEY_THREADS``."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("FILTERKEY_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)
