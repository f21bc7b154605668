"""Kernel backend selection.

The compiled extension ``nilspec._kernels`` is used when it was built;
otherwise the numpy fallback in ``nilspec._kernels_py`` is loaded. Setting
``NILSPEC_PURE=1`` in the environment forces the fallback.
"""
import importlib
import os

import numpy as np

from . import _kernels_py

_NAMES = (
    "heis_orbit",
    "heis_reduce",
    "affine_orbit",
    "circle_cumsum",
    "zak_eval",
    "lag_correlation",
    "character_tables",
)


def _load_compiled():
    if os.environ.get("NILSPEC_PURE", "").strip() not in ("", "0"):
        return None
    try:
        return importlib.import_module("nilspec._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" / "python"), or the active one."""
    if name is None:
        return _compiled if _compiled is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available in this install")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])


_active = get_backend()
heis_orbit = _active.heis_orbit
heis_reduce = _active.heis_reduce
affine_orbit = _active.affine_orbit
circle_cumsum = _active.circle_cumsum
zak_eval = _active.zak_eval
# BLAS vdot beats the compiled loop (see bench/bench_kernels.py)
lag_correlation = _kernels_py.lag_correlation
character_tables = _active.character_tables

TABLE_CHUNK = 1 << 15


def _rows(F, dims):
    keys = [tuple(row) for row in F[:, dims]]
    uniq = sorted(set(keys))
    index = {k: i for i, k in enumerate(uniq)}
    return uniq, np.array([index[k] for k in keys], dtype=np.int64)


def _block(tables, dims, uniq, K):
    cols = np.asarray(uniq, dtype=np.int64).reshape(len(uniq), len(dims)) + K
    out = None
    for c, r in enumerate(dims):
        part = tables[r][:, cols[:, c]]
        out = part if out is None else out * part
    if out is None:
        out = np.ones((tables.shape[1], 1), dtype=np.complex128)
    return out


def character_lag_sums(delta, weights, freqs, backend=None):
    """sum_i w_i e(xi . delta_i) for every integer frequency row xi of ``freqs``.

    The dimensions are split in two groups; with L and R the characters of
    the two halves evaluated at the nodes, all sums are entries of the small
    matrix L^T diag(w) R, which is accumulated over node chunks.
    """
    mod = get_backend(backend) if backend else _active
    D = np.ascontiguousarray(delta, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    F = np.asarray(freqs, dtype=np.int64).reshape(-1, D.shape[1])
    if F.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    K = int(np.abs(F).max())
    d = D.shape[1]
    left, right = list(range(d // 2)), list(range(d // 2, d))
    uL, iL = _rows(F, left)
    uR, iR = _rows(F, right)
    M = np.zeros((len(uL), len(uR)), dtype=np.complex128)
    for lo in range(0, D.shape[0], TABLE_CHUNK):
        hi = min(lo + TABLE_CHUNK, D.shape[0])
        tables = mod.character_tables(D[lo:hi], K)
        L = _block(tables, left, uL, K) * w[lo:hi, None]
        R = _block(tables, right, uR, K)
        M += L.T @ R
    return M[iL, iR]
