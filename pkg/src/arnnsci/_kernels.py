"""Compiled kernels for Hamiltonian subspace assembly.

Rows are processed independently; each kernel call emits the upper triangle
(col >= row) of the excitation-connected matrix elements for a contiguous
row range, so chunks can run on worker threads and be concatenated in a
fixed order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .determinant import spatial_of_bit

U0 = np.uint64(0)
U1 = np.uint64(1)


def worker_count() -> int:
    raw = os.environ.get("ARNNSCI_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@njit(cache=True, inline="always")
def _popcnt(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def _mask_below(q):
    return (U1 << np.uint64(q)) - U1


@njit(cache=True, inline="always")
def _phase(bits, q):
    return -1.0 if _popcnt(bits & _mask_below(q)) & 1 else 1.0


@njit(cache=True, inline="always")
def _find(sorted_keys, key):
    lo = 0
    hi = sorted_keys.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if sorted_keys[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    if lo < sorted_keys.size and sorted_keys[lo] == key:
        return lo
    return -1


@njit(cache=True, inline="always")
def _double_element(bits, i, j, x, y, spat, spin, h2):
    """<b|H|a> for the two-particle move (i,j) -> (x,y), i<j and x<y."""
    pi, si = spat[i], spin[i]
    pj, sj = spat[j], spin[j]
    px, sx = spat[x], spin[x]
    py, sy = spat[y], spin[y]
    direct = h2[pi, px, pj, py] if (si == sx and sj == sy) else 0.0
    exch = h2[pi, py, pj, px] if (si == sy and sj == sx) else 0.0
    sign = 1.0
    work = bits
    sign *= _phase(work, i)
    work ^= U1 << np.uint64(i)
    sign *= _phase(work, j)
    work ^= U1 << np.uint64(j)
    sign *= _phase(work, y)
    work |= U1 << np.uint64(y)
    sign *= _phase(work, x)
    return sign * (direct - exch)


@njit(cache=True, nogil=True)
def _rows_kernel(keys, sorted_keys, order, row_lo, row_hi, spat, spin,
                 h1, h2, core, out_rows, out_cols, out_vals):
    m = spat.size
    half = m // 2
    occ = np.empty(m, np.int64)
    vac = np.empty(m, np.int64)
    count = 0
    for r in range(row_lo, row_hi):
        bits = keys[r]
        nocc = 0
        nvac = 0
        for q in range(m):
            if (bits >> np.uint64(q)) & U1:
                occ[nocc] = q
                nocc += 1
            else:
                vac[nvac] = q
                nvac += 1
        # diagonal
        val = core
        for ui in range(nocc):
            pu, su = spat[occ[ui]], spin[occ[ui]]
            val += h1[pu, pu]
            for vi in range(ui + 1, nocc):
                pv, sv = spat[occ[vi]], spin[occ[vi]]
                val += h2[pu, pu, pv, pv]
                if su == sv:
                    val -= h2[pu, pv, pv, pu]
        out_rows[count] = r
        out_cols[count] = r
        out_vals[count] = val
        count += 1
        # singles, spin preserving
        for ui in range(nocc):
            i = occ[ui]
            si = spin[i]
            pi = spat[i]
            for vi in range(nvac):
                x = vac[vi]
                if spin[x] != si:
                    continue
                g = (bits ^ (U1 << np.uint64(i))) | (U1 << np.uint64(x))
                idx = _find(sorted_keys, g)
                if idx < 0:
                    continue
                col = order[idx]
                if col < r:
                    continue
                px = spat[x]
                lo = i if i < x else x
                hi = x if i < x else i
                between = bits & (_mask_below(hi) ^ _mask_below(lo + 1))
                sign = -1.0 if _popcnt(between) & 1 else 1.0
                el = h1[pi, px]
                for wi in range(nocc):
                    u = occ[wi]
                    if u == i:
                        continue
                    pu, su = spat[u], spin[u]
                    el += h2[pi, px, pu, pu]
                    if su == si:
                        el -= h2[pi, pu, pu, px]
                out_rows[count] = r
                out_cols[count] = col
                out_vals[count] = sign * el
                count += 1
        # doubles: both moves within one spin block
        for ui in range(nocc):
            i = occ[ui]
            for vi in range(ui + 1, nocc):
                j = occ[vi]
                if spin[i] != spin[j]:
                    continue
                for ai in range(nvac):
                    x = vac[ai]
                    if spin[x] != spin[i]:
                        continue
                    for bi in range(ai + 1, nvac):
                        y = vac[bi]
                        if spin[y] != spin[i]:
                            continue
                        g = (bits ^ (U1 << np.uint64(i)) ^ (U1 << np.uint64(j))) \
                            | (U1 << np.uint64(x)) | (U1 << np.uint64(y))
                        idx = _find(sorted_keys, g)
                        if idx < 0:
                            continue
                        col = order[idx]
                        if col < r:
                            continue
                        out_rows[count] = r
                        out_cols[count] = col
                        out_vals[count] = _double_element(bits, i, j, x, y, spat, spin, h2)
                        count += 1
        # doubles: one move per spin block (down bits precede up bits)
        for ui in range(nocc):
            i = occ[ui]
            if i >= half:
                break
            for vi in range(nocc):
                j = occ[vi]
                if j < half:
                    continue
                for ai in range(nvac):
                    x = vac[ai]
                    if x >= half:
                        break
                    for bi in range(nvac):
                        y = vac[bi]
                        if y < half:
                            continue
                        g = (bits ^ (U1 << np.uint64(i)) ^ (U1 << np.uint64(j))) \
                            | (U1 << np.uint64(x)) | (U1 << np.uint64(y))
                        idx = _find(sorted_keys, g)
                        if idx < 0:
                            continue
                        col = order[idx]
                        if col < r:
                            continue
                        out_rows[count] = r
                        out_cols[count] = col
                        out_vals[count] = _double_element(bits, i, j, x, y, spat, spin, h2)
                        count += 1
    return count


def _row_capacity(keys: np.ndarray, m: int) -> int:
    half = m // 2
    down = np.bitwise_count(keys & np.uint64((1 << half) - 1)).astype(np.int64)
    up = np.bitwise_count(keys >> np.uint64(half)).astype(np.int64)
    vd, vu = half - down, half - up
    singles = down * vd + up * vu
    doubles = (
        down * (down - 1) // 2 * (vd * (vd - 1) // 2)
        + up * (up - 1) // 2 * (vu * (vu - 1) // 2)
        + down * vd * up * vu
    )
    return int((1 + singles + doubles).max())


def assemble_coo(keys: np.ndarray, table,
                 chunk_rows: int | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper-triangle COO arrays of the subspace Hamiltonian over ``keys``.

    Chunks of rows run independently (worker threads when ARNNSCI_THREADS
    allows) and concatenate in chunk order, so the output is identical for
    any worker count or chunk size.
    """
    m = table.m
    spat = np.empty(m, np.int64)
    spin = np.empty(m, np.int64)
    for q in range(m):
        spat[q], spin[q] = spatial_of_bit(q, m)
    sorter = np.argsort(keys, kind="stable")
    sorted_keys = keys[sorter]
    order = sorter.astype(np.int64)
    cap = _row_capacity(keys, m)
    n = keys.size
    chunk = chunk_rows or max(1, min(n, max(256, 2**22 // max(cap, 1))))
    spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

    def run(span):
        lo, hi = span
        size = (hi - lo) * cap
        rows = np.empty(size, np.int32)
        cols = np.empty(size, np.int32)
        vals = np.empty(size, np.float64)
        cnt = _rows_kernel(keys, sorted_keys, order, lo, hi, spat, spin,
                           table.h1, table.h2, table.core_energy, rows, cols, vals)
        return rows[:cnt].copy(), cols[:cnt].copy(), vals[:cnt].copy()

    workers = worker_count()
    if workers == 1 or len(spans) == 1:
        parts = [run(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, spans))
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    return rows, cols, vals
