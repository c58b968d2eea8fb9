"""Edit-distance kernels over integer-coded token sequences.

Two interchangeable backends compute the same full Levenshtein table and
traceback:

* ``numba``: scalar loops compiled with ``@njit`` (``nogil`` so thread pools
  scale).
* ``numpy``: row-at-a-time vectorised recurrence; the insertion chain inside
  a row is resolved with ``np.minimum.accumulate``.

Set ``NOTESCORE_DISABLE_NUMBA=1`` to force the numpy path. The numba path is
also skipped if numba cannot be imported.
"""

import os

import numpy as np

KEEP, SUB, DEL, INS = 0, 1, 2, 3

_DISABLED = os.environ.get("NOTESCORE_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def dp_table_numpy(a, b):
    n, m = a.shape[0], b.shape[0]
    d = np.empty((n + 1, m + 1), dtype=np.int32)
    cols = np.arange(m + 1, dtype=np.int32)
    d[0] = cols
    cand = np.empty(m + 1, dtype=np.int32)
    for i in range(1, n + 1):
        prev = d[i - 1]
        cand[0] = i
        # diagonal (keep/substitute) vs. vertical (delete)
        np.minimum(prev[:-1] + (b != a[i - 1]), prev[1:] + 1, out=cand[1:])
        # horizontal (insert): row[j] = min_k<=j cand[k] + (j - k)
        d[i] = np.minimum.accumulate(cand - cols) + cols
    return d


def traceback_python(d, a, b):
    i, j = a.shape[0], b.shape[0]
    ops = np.empty(i + j, dtype=np.int8)
    k = i + j
    while i > 0 or j > 0:
        cur = d[i, j]
        k -= 1
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i - 1, j - 1] == cur:
            ops[k] = KEEP
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and d[i - 1, j - 1] + 1 == cur:
            ops[k] = SUB
            i -= 1
            j -= 1
        elif i > 0 and d[i - 1, j] + 1 == cur:
            ops[k] = DEL
            i -= 1
        else:
            ops[k] = INS
            j -= 1
    return ops[k:].copy()


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def dp_table_numba(a, b):
        n, m = a.shape[0], b.shape[0]
        d = np.empty((n + 1, m + 1), dtype=np.int32)
        for j in range(m + 1):
            d[0, j] = j
        for i in range(1, n + 1):
            d[i, 0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                best = d[i - 1, j - 1]
                if ai != b[j - 1]:
                    best += 1
                v = d[i - 1, j] + 1
                if v < best:
                    best = v
                v = d[i, j - 1] + 1
                if v < best:
                    best = v
                d[i, j] = best
        return d

    traceback_numba = njit(cache=True, nogil=True)(traceback_python)

else:  # pragma: no cover
    dp_table_numba = None
    traceback_numba = None


BACKEND = "numba" if (HAS_NUMBA and not _DISABLED) else "numpy"


def get_backend(name=None):
    """Return ``(dp_table, traceback)`` for ``name`` (default: active backend)."""
    name = name or BACKEND
    if name == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return dp_table_numba, traceback_numba
    if name == "numpy":
        return dp_table_numpy, traceback_python
    raise ValueError(f"unknown backend {name!r}")


def edit_ops(a, b, backend=None):
    """Full table plus op codes for the tie-broken minimal alignment."""
    dp, tb = get_backend(backend)
    d = dp(a, b)
    return int(d[a.shape[0], b.shape[0]]), tb(d, a, b)


def warmup(backend=None):
    """Compile (or load from cache) the kernels so later calls are timed
    without the one-off JIT cost."""
    x = np.array([0, 1, 2], dtype=np.int64)
    edit_ops(x, x[::-1].copy(), backend)
