"""Determinant CI reference solvers (CISD and small-space FCI).

Uses an interleaved spin-orbital convention (index 2p for alpha, 2p+1 for
beta on spatial orbital p) with antisymmetrized physicists' integrals, kept
deliberately separate from any consumer's conventions.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

FCI_GUARD = 20_000


def spin_orbital_integrals(h1: np.ndarray, eri_chem: np.ndarray):
    """(h_so, <IJ||KL>) over interleaved spin-orbitals."""
    n = h1.shape[0]
    m = 2 * n
    h_so = np.zeros((m, m))
    h_so[0::2, 0::2] = h1
    h_so[1::2, 1::2] = h1
    # physicists' <IJ|KL> = (p_I p_K | p_J p_L) delta(sI,sK) delta(sJ,sL)
    phys = eri_chem.transpose(0, 2, 1, 3)
    g = np.zeros((m, m, m, m))
    for si in (0, 1):
        for sj in (0, 1):
            g[si::2, sj::2, si::2, sj::2] = phys
    return h_so, g - g.transpose(0, 1, 3, 2)


def hartree_fock_determinant(n_orb: int, n_elec: int) -> int:
    bits = 0
    for p in range(n_elec // 2):
        bits |= 1 << (2 * p)
        bits |= 1 << (2 * p + 1)
    return bits


def sz_zero_determinants(n_orb: int, n_elec: int) -> list[int]:
    na = n_elec // 2
    alphas = [sum(1 << (2 * p) for p in occ) for occ in combinations(range(n_orb), na)]
    betas = [sum(1 << (2 * p + 1) for p in occ) for occ in combinations(range(n_orb), na)]
    return [a | b for a in alphas for b in betas]


def cisd_determinants(n_orb: int, n_elec: int) -> list[int]:
    hf = hartree_fock_determinant(n_orb, n_elec)
    m = 2 * n_orb
    occ = [q for q in range(m) if (hf >> q) & 1]
    vac = [q for q in range(m) if not (hf >> q) & 1]
    dets = {hf}
    for i in occ:
        for a in vac:
            if (i ^ a) & 1 == 0:  # same spin
                dets.add(hf ^ (1 << i) | (1 << a))
    for i, j in combinations(occ, 2):
        for a, b in combinations(vac, 2):
            if (i % 2, j % 2) in (((a % 2), (b % 2)), ((b % 2), (a % 2))):
                cand = hf ^ (1 << i) ^ (1 << j) | (1 << a) | (1 << b)
                if bin(cand).count("1") == n_elec:
                    alpha = sum((cand >> q) & 1 for q in range(0, m, 2))
                    if alpha == n_elec // 2:
                        dets.add(cand)
    return sorted(dets)


def _sign(bits: int, q: int) -> float:
    return -1.0 if bin(bits & ((1 << q) - 1)).count("1") & 1 else 1.0


def matrix_element(da: int, db: int, h_so: np.ndarray, g_anti: np.ndarray, m: int) -> float:
    diff = da ^ db
    removed = [q for q in range(m) if (diff >> q) & 1 and (da >> q) & 1]
    added = [q for q in range(m) if (diff >> q) & 1 and (db >> q) & 1]
    if len(removed) != len(added) or len(removed) > 2:
        return 0.0
    occ = [q for q in range(m) if (da >> q) & 1]
    if not removed:
        val = sum(h_so[q, q] for q in occ)
        for a, b in combinations(occ, 2):
            val += g_anti[a, b, a, b]
        return val
    if len(removed) == 1:
        i, a = removed[0], added[0]
        lo, hi = min(i, a), max(i, a)
        sign = (-1.0) ** bin(da & ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)).count("1")
        val = h_so[i, a]
        for q in occ:
            if q != i:
                val += g_anti[i, q, a, q]
        return sign * val
    (i, j), (a, b) = removed, added
    sign = 1.0
    work = da
    for q in (i, j):
        sign *= _sign(work, q)
        work ^= 1 << q
    for q in (b, a):
        sign *= _sign(work, q)
        work |= 1 << q
    return sign * g_anti[i, j, a, b]


def _dense_hamiltonian(dets: list[int], h_so, g_anti, m: int) -> np.ndarray:
    keys = np.array(dets, dtype=np.uint64)
    n = len(dets)
    ham = np.zeros((n, n))
    degrees = np.bitwise_count(keys[:, None] ^ keys[None, :])
    for i in range(n):
        for j in range(i, n):
            if degrees[i, j] <= 4:
                ham[i, j] = ham[j, i] = matrix_element(dets[i], dets[j], h_so, g_anti, m)
    return ham


def lowest_eigenvalue(dets: list[int], h1, eri_chem, core: float) -> float:
    h_so, g_anti = spin_orbital_integrals(h1, eri_chem)
    ham = _dense_hamiltonian(dets, h_so, g_anti, 2 * h1.shape[0])
    return float(np.linalg.eigvalsh(ham)[0] + core)


def cisd_energy(h1, eri_chem, core: float, n_elec: int) -> float:
    dets = cisd_determinants(h1.shape[0], n_elec)
    return lowest_eigenvalue(dets, h1, eri_chem, core)


def fci_energy(h1, eri_chem, core: float, n_elec: int) -> float | None:
    """Exact lowest energy in the Sz = 0 space, or None past the desk guard."""
    from math import comb

    n_orb = h1.shape[0]
    dim = comb(n_orb, n_elec // 2) ** 2
    if dim > FCI_GUARD:
        return None
    dets = sz_zero_determinants(n_orb, n_elec)
    return lowest_eigenvalue(dets, h1, eri_chem, core)
