"""Forward/backward chain sweep: the hot loop of the slide propagator.

Inputs are flat over all window tuples: ``starts`` holds the window
boundaries (length m+1), ``lkey[t]``/``rkey[t]`` are the dense ids of tuple
t's overlap with the previous/next window, and ``nkeys`` bounds both. A
stamp array avoids clearing per-window hash sets.

Two interchangeable backends: a numba ``@njit`` loop and a numpy version
that loops over windows and vectorizes within a window. Set
``SLIDEKIT_DISABLE_NUMBA=1`` (or call :func:`set_backend`) to force numpy.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None

HAVE_NUMBA = numba is not None


def _env_backend() -> str:
    flag = os.environ.get("SLIDEKIT_DISABLE_NUMBA", "").strip().lower()
    if not HAVE_NUMBA or flag in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba"


_backend = _env_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextmanager
def backend(name: str):
    old = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)


def sweep_numpy(starts, lkey, rkey, nkeys):
    m = len(starts) - 1
    total = int(starts[-1])
    fwd = np.zeros(total, dtype=np.bool_)
    bwd = np.zeros(total, dtype=np.bool_)
    fwd[starts[0]:starts[1]] = True
    bwd[starts[m - 1]:starts[m]] = True
    stamp = np.zeros(nkeys, dtype=np.int64)
    for i in range(m - 1):
        a, b, c = starts[i], starts[i + 1], starts[i + 2]
        stamp[rkey[a:b][fwd[a:b]]] = i + 1
        fwd[b:c] = stamp[lkey[b:c]] == i + 1
    stamp[:] = 0
    for i in range(m - 1, 0, -1):
        a, b, c = starts[i - 1], starts[i], starts[i + 1]
        stamp[lkey[b:c][bwd[b:c]]] = i
        bwd[a:b] = stamp[rkey[a:b]] == i
    return fwd, bwd


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _sweep_numba(starts, lkey, rkey, nkeys):
        m = len(starts) - 1
        total = starts[m]
        fwd = np.zeros(total, dtype=np.bool_)
        bwd = np.zeros(total, dtype=np.bool_)
        for t in range(starts[0], starts[1]):
            fwd[t] = True
        for t in range(starts[m - 1], starts[m]):
            bwd[t] = True
        stamp = np.zeros(nkeys, dtype=np.int64)
        for i in range(m - 1):
            for t in range(starts[i], starts[i + 1]):
                if fwd[t]:
                    stamp[rkey[t]] = i + 1
            for t in range(starts[i + 1], starts[i + 2]):
                fwd[t] = stamp[lkey[t]] == i + 1
        for j in range(nkeys):
            stamp[j] = 0
        for i in range(m - 1, 0, -1):
            for t in range(starts[i], starts[i + 1]):
                if bwd[t]:
                    stamp[lkey[t]] = i
            for t in range(starts[i - 1], starts[i]):
                bwd[t] = stamp[rkey[t]] == i
        return fwd, bwd
else:  # pragma: no cover
    _sweep_numba = None


def support_numpy(tuples, starts, alive, lw, first, lo, span, nloc):
    m, k = lw.shape
    win = np.repeat(np.arange(m), np.diff(starts))[alive]
    rows = tuples[alive]
    out = np.zeros(nloc * span, dtype=np.bool_)
    for p in range(k):
        sel = first[win, p]
        out[lw[win[sel], p] * span + (rows[sel, p] - lo)] = True
    return out


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _support_numba(tuples, starts, alive, lw, first, lo, span, nloc):
        m, k = lw.shape
        out = np.zeros(nloc * span, dtype=np.bool_)
        for i in range(m):
            for t in range(starts[i], starts[i + 1]):
                if alive[t]:
                    for p in range(k):
                        if first[i, p]:
                            out[lw[i, p] * span + tuples[t, p] - lo] = True
        return out
else:  # pragma: no cover
    _support_numba = None


def supported_values(tuples, starts, alive, lw, first, lo: int, span: int, nloc: int) -> np.ndarray:
    """Flags over ``local_var * span + (value - lo)``: values used by an alive tuple.

    Only the cells flagged in ``first`` (each variable's first window) are read.
    """
    if _backend == "numba":
        return _support_numba(
            np.ascontiguousarray(tuples, dtype=np.int64), starts, alive, lw, first, lo, span, nloc
        )
    return support_numpy(tuples, starts, alive, lw, first, lo, span, nloc)


def sweep(starts: np.ndarray, lkey: np.ndarray, rkey: np.ndarray, nkeys: int):
    """Return the forward and backward reachability masks over all tuples."""
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    lkey = np.ascontiguousarray(lkey, dtype=np.int64)
    rkey = np.ascontiguousarray(rkey, dtype=np.int64)
    nkeys = max(int(nkeys), 1)
    if _backend == "numba":
        return _sweep_numba(starts, lkey, rkey, nkeys)
    return sweep_numpy(starts, lkey, rkey, nkeys)
