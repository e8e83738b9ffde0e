"""Backend switch: numba kernels unless SUPBOUND_NUMBA=0 (or numba is missing)."""

import os

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def numba_requested():
    return os.environ.get("SUPBOUND_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def use_numba():
    return HAVE_NUMBA and numba_requested()


def max_threads():
    raw = os.environ.get("SUPBOUND_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
