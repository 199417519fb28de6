"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names ``grid_sums``, ``fixed_point_eval`` and ``running_lil`` are
bound to the numba versions unless numba is missing or
``LACUNARY_DISABLE_NUMBA`` is set; see :mod:`lacunary._accel`.

Phase conventions
-----------------
Grid kernels receive exact residues: the angle of frequency ``j`` at sample
``i`` is ``2*pi*((j * res[k] * (start + step*i)) mod Q) / Q`` with every
product done in int64, so ``Q`` must stay below 2**31.

Fixed-point kernels receive a phase ``t`` in [0, 1) encoded as a uint64
``round_down(t * 2**64)``; multiplying by ``j`` in uint64 wraps modulo 2**64,
which is exactly reduction of ``j*t`` modulo 1.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange

TWO_PI = 2.0 * math.pi
TWO_POW_M64 = 2.0 ** -64
GRID_Q_LIMIT = 2 ** 31


# -- trigonometric polynomial on an exact rational grid ---------------------
#
# Sample i has numerator start + step*i, so for a fixed frequency the phase
# advances by a constant residue: p_{i+1} = p_i + inc (mod Q). Angles are
# read from a table of cos/sin(2 pi m/Q) when Q is small enough.

TABLE_LIMIT = 1 << 22
_TABLES = {}


def trig_table(Q):
    """``(cos, sin)`` of ``2 pi m / Q`` for ``m < Q`` (cached), or ``None`` if Q is large."""
    if Q > TABLE_LIMIT:
        return None
    tab = _TABLES.get(Q)
    if tab is None:
        ang = np.arange(Q, dtype=np.float64) * (TWO_PI / Q)
        tab = (np.cos(ang), np.sin(ang))
        if len(_TABLES) > 8:
            _TABLES.clear()
        _TABLES[Q] = tab
    return tab


def _grid_sums_numpy(res, start, step, M, Q, js, ac, bc):
    out = np.zeros(M, dtype=np.float64)
    tab = trig_table(Q)
    idx = np.arange(M, dtype=np.int64)
    for k in range(res.shape[0]):
        for d in range(js.shape[0]):
            a = (js[d] * res[k]) % Q
            ph = ((a * start) % Q + ((a * step) % Q) * idx) % Q
            if tab is None:
                ang = ph * (TWO_PI / Q)
                cs, sn = np.cos(ang), np.sin(ang)
            else:
                cs, sn = tab[0][ph], tab[1][ph]
            if ac[d] != 0.0:
                out += ac[d] * cs
            if bc[d] != 0.0:
                out += bc[d] * sn
    return out


@njit(parallel=True, cache=True)
def _grid_sums_jit(res, start, step, M, Q, js, ac, bc, ctab, stab, use_tab):
    out = np.zeros(M, dtype=np.float64)
    chunk = 4096
    nchunks = (M + chunk - 1) // chunk
    scale = TWO_PI / Q
    for c in prange(nchunks):
        i0 = c * chunk
        i1 = min(M, i0 + chunk)
        for k in range(res.shape[0]):
            for d in range(js.shape[0]):
                a = (js[d] * res[k]) % Q
                inc = (a * step) % Q
                ph = ((a * start) % Q + inc * i0) % Q
                ca = ac[d]
                cb = bc[d]
                for i in range(i0, i1):
                    if use_tab:
                        cs = ctab[ph]
                        sn = stab[ph]
                    else:
                        cs = math.cos(ph * scale)
                        sn = math.sin(ph * scale)
                    if ca != 0.0:
                        out[i] += ca * cs
                    if cb != 0.0:
                        out[i] += cb * sn
                    ph += inc
                    if ph >= Q:
                        ph -= Q
    return out


def _grid_sums_numba(res, start, step, M, Q, js, ac, bc):
    tab = trig_table(Q)
    if tab is None:
        empty = np.zeros(1)
        return _grid_sums_jit(res, start, step, M, Q, js, ac, bc, empty, empty, False)
    return _grid_sums_jit(res, start, step, M, Q, js, ac, bc, tab[0], tab[1], True)


# -- trigonometric polynomial at fixed-point phases -------------------------

def _fixed_point_eval_numpy(phases, js, ac, bc):
    out = np.zeros(phases.shape, dtype=np.float64)
    for d in range(js.shape[0]):
        t = phases * np.uint64(js[d])
        ang = t.astype(np.float64) * (TWO_PI * TWO_POW_M64)
        if ac[d] != 0.0:
            out += ac[d] * np.cos(ang)
        if bc[d] != 0.0:
            out += bc[d] * np.sin(ang)
    return out


@njit(cache=True)
def _fixed_point_eval_flat(phases, js, ac, bc):
    out = np.zeros(phases.shape[0], dtype=np.float64)
    scale = TWO_PI * TWO_POW_M64
    for i in range(phases.shape[0]):
        s = 0.0
        for d in range(js.shape[0]):
            t = phases[i] * np.uint64(js[d])
            ang = np.float64(t) * scale
            if ac[d] != 0.0:
                s += ac[d] * math.cos(ang)
            if bc[d] != 0.0:
                s += bc[d] * math.sin(ang)
        out[i] = s
    return out


def _fixed_point_eval_numba(phases, js, ac, bc):
    flat = np.ascontiguousarray(phases).reshape(-1)
    return _fixed_point_eval_flat(flat, js, ac, bc).reshape(phases.shape)


# -- running partial sums and LIL ratios ------------------------------------

def _running_lil_numpy(vals, ck_idx, denom, two_sided=False):
    sums = np.cumsum(vals)[ck_idx]
    if two_sided:
        sums = np.abs(sums)
    ratios = sums / denom
    return ratios, np.maximum.accumulate(ratios)


@njit(cache=True)
def _running_lil_jit(vals, ck_idx, denom, two_sided):
    C = ck_idx.shape[0]
    ratios = np.empty(C, dtype=np.float64)
    runmax = np.empty(C, dtype=np.float64)
    s = 0.0
    pos = 0
    best = -np.inf
    for c in range(C):
        stop = ck_idx[c]
        while pos <= stop:
            s += vals[pos]
            pos += 1
        r = (abs(s) if two_sided else s) / denom[c]
        ratios[c] = r
        if r > best:
            best = r
        runmax[c] = best
    return ratios, runmax


def _running_lil_numba(vals, ck_idx, denom, two_sided=False):
    return _running_lil_jit(vals, ck_idx, denom, bool(two_sided))


# -- sparse Laurent polynomial product with int64 exponents -----------------

def _sparse_mul_numpy(e1, c1, e2, c2):
    e = (e1[:, None] + e2[None, :]).ravel()
    c = (c1[:, None] * c2[None, :]).ravel()
    order = np.argsort(e, kind="stable")
    e = e[order]
    c = c[order]
    if e.size == 0:
        return e, c
    starts = np.flatnonzero(np.r_[True, e[1:] != e[:-1]])
    return e[starts], np.add.reduceat(c, starts)


@njit(cache=True)
def _sparse_mul_numba(e1, c1, e2, c2):
    n1 = e1.shape[0]
    n2 = e2.shape[0]
    e = np.empty(n1 * n2, dtype=np.int64)
    c = np.empty(n1 * n2, dtype=np.complex128)
    p = 0
    for a in range(n1):
        for b in range(n2):
            e[p] = e1[a] + e2[b]
            c[p] = c1[a] * c2[b]
            p += 1
    order = np.argsort(e)
    out_e = np.empty(n1 * n2, dtype=np.int64)
    out_c = np.zeros(n1 * n2, dtype=np.complex128)
    m = -1
    for q in range(order.shape[0]):
        idx = order[q]
        if m < 0 or e[idx] != out_e[m]:
            m += 1
            out_e[m] = e[idx]
        out_c[m] += c[idx]
    return out_e[: m + 1], out_c[: m + 1]


if USE_NUMBA:
    grid_sums = _grid_sums_numba
    fixed_point_eval = _fixed_point_eval_numba
    running_lil = _running_lil_numba
else:
    grid_sums = _grid_sums_numpy
    fixed_point_eval = _fixed_point_eval_numpy
    running_lil = _running_lil_numpy
# numpy's sort beats the compiled loop here (see benchmarks/), so both
# backends use it; the numba version stays for parity tests
sparse_mul = _sparse_mul_numpy

NUMPY_KERNELS = {
    "grid_sums": _grid_sums_numpy,
    "fixed_point_eval": _fixed_point_eval_numpy,
    "running_lil": _running_lil_numpy,
    "sparse_mul": _sparse_mul_numpy,
}
NUMBA_KERNELS = {
    "grid_sums": _grid_sums_numba,
    "fixed_point_eval": _fixed_point_eval_numba,
    "running_lil": _running_lil_numba,
    "sparse_mul": _sparse_mul_numba,
}
