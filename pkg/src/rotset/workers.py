import os


def worker_count() -> int:
    """Parallelism cap from ROTSET_THREADS (default: logical cores)."""
    raw = os.environ.get("ROTSET_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"ROTSET_THREADS must be a positive integer, got {raw!r}") from None
    return os.cpu_count() or 1
