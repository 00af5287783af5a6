"""Hot numeric kernels: applying a small operator to targeted cells of a register.

Two interchangeable implementations exist: a numba-jitted gather/scatter loop
and a pure-numpy reshape/matmul path.  Selection is by the environment
variable ``CQTM_KERNEL`` (``numba``, ``numpy`` or ``auto``; default ``auto``
picks numba when it imports).  ``benchmarks/bench_kernels.py`` compares both.
"""

from __future__ import annotations

import os
from functools import reduce

import numpy as np

_CHOICE = os.environ.get("CQTM_KERNEL", "auto").lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"CQTM_KERNEL must be auto|numba|numpy, got {_CHOICE!r}")

_HAVE_NUMBA = False
if _CHOICE in ("auto", "numba"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _CHOICE == "numba":
            raise


def active_kernel() -> str:
    """Name of the kernel path in use ('numba' or 'numpy')."""
    return "numba" if _HAVE_NUMBA else "numpy"


def _digit_offsets(strides: np.ndarray, d: int) -> np.ndarray:
    """Flat-index offsets of every base-d digit combination over the strides."""
    if strides.size == 0:
        return np.zeros(1, dtype=np.int64)
    per_cell = [np.arange(d, dtype=np.int64) * s for s in strides]
    return reduce(np.add.outer, per_cell).ravel()


def cell_strides(d: int, n: int) -> np.ndarray:
    """Stride of each cell in a d^n register, cell 0 most significant."""
    return d ** np.arange(n - 1, -1, -1, dtype=np.int64)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _gather_scatter(amps, op, toffs, roffs, out):  # pragma: no cover
        m = toffs.shape[0]
        buf = np.empty(m, np.complex128)
        for r in range(roffs.shape[0]):
            base = roffs[r]
            for a in range(m):
                buf[a] = amps[base + toffs[a]]
            for a in range(m):
                acc = 0j
                for b in range(m):
                    acc += op[a, b] * buf[b]
                out[base + toffs[a]] = acc


def _apply_numba(amps: np.ndarray, op: np.ndarray, targets, d: int, n: int) -> np.ndarray:
    strides = cell_strides(d, n)
    tgt = np.asarray(targets, dtype=np.int64)
    rest = np.array([i for i in range(n) if i not in set(targets)], dtype=np.int64)
    toffs = _digit_offsets(strides[tgt], d)
    roffs = _digit_offsets(strides[rest], d)
    out = np.empty_like(amps)
    _gather_scatter(amps, np.ascontiguousarray(op), toffs, roffs, out)
    return out


def _apply_numpy(amps: np.ndarray, op: np.ndarray, targets, d: int, n: int) -> np.ndarray:
    k = len(targets)
    view = amps.reshape((d,) * n)
    moved = np.moveaxis(view, targets, range(k))
    flat = moved.reshape(d**k, -1)
    res = op @ flat
    back = np.moveaxis(res.reshape((d,) * n), range(k), targets)
    return np.ascontiguousarray(back).reshape(-1)


def apply_to_targets(amps: np.ndarray, op: np.ndarray, targets, d: int, n: int) -> np.ndarray:
    """Apply a d^k x d^k operator to the given cells of a d^n amplitude array.

    ``targets`` lists cell indices in operator-operand order (first target is
    the operator's most significant cell).  Returns a fresh array.
    """
    k = len(targets)
    if op.shape != (d**k, d**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} cells of dim {d}")
    if len(set(targets)) != k or any(t < 0 or t >= n for t in targets):
        raise ValueError(f"bad target cells {targets!r} for register of {n}")
    if n == 0:
        return op @ amps
    if _HAVE_NUMBA:
        return _apply_numba(amps, op, targets, d, n)
    return _apply_numpy(amps, op, targets, d, n)
