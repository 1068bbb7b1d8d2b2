"""Molecular integrals over contracted Cartesian Gaussians (s and p only).

McMurchie-Davidson scheme: products of Gaussians are expanded in Hermite
Gaussians (coefficients E), Coulomb integrals reduce to the Hermite-Coulomb
tensor R built on the Boys function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaln

ANGSTROM_TO_BOHR = 1.0 / 0.52917721092

# Cartesian components per angular momentum, in fixed order
CARTESIANS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
}


@dataclass(frozen=True)
class Shell:
    center: tuple[float, float, float]
    l: int
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]  # for normalized primitives


def boys(n_max: int, x: float) -> np.ndarray:
    """F_n(x) for n = 0..n_max via the regularized lower incomplete gamma."""
    ns = np.arange(n_max + 1)
    if x < 1e-13:
        return 1.0 / (2.0 * ns + 1.0)
    s = ns + 0.5
    return 0.5 * np.exp(gammaln(s) - s * np.log(x)) * gammainc(s, x)


@lru_cache(maxsize=200_000)
def hermite_e(i: int, j: int, t: int, q_dist: float, a: float, b: float) -> float:
    """Hermite expansion coefficient E_t^{ij} for one Cartesian direction."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return float(np.exp(-mu * q_dist * q_dist))
    if j == 0:
        return (
            hermite_e(i - 1, j, t - 1, q_dist, a, b) / (2 * p)
            - (mu * q_dist / a) * hermite_e(i - 1, j, t, q_dist, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, q_dist, a, b)
        )
    return (
        hermite_e(i, j - 1, t - 1, q_dist, a, b) / (2 * p)
        + (mu * q_dist / b) * hermite_e(i, j - 1, t, q_dist, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, q_dist, a, b)
    )


def _overlap_prim(a, lmn1, ra, b, lmn2, rb) -> float:
    p = a + b
    s = (np.pi / p) ** 1.5
    for q in range(3):
        s *= hermite_e(lmn1[q], lmn2[q], 0, ra[q] - rb[q], a, b)
    return float(s)


def _kinetic_prim(a, lmn1, ra, b, lmn2, rb) -> float:
    l2, m2, n2 = lmn2
    term = b * (2 * (l2 + m2 + n2) + 3) * _overlap_prim(a, lmn1, ra, b, lmn2, rb)
    for q, inc in enumerate(((2, 0, 0), (0, 2, 0), (0, 0, 2))):
        bumped = tuple(lmn2[k] + inc[k] for k in range(3))
        term -= 2 * b * b * _overlap_prim(a, lmn1, ra, b, bumped, rb)
        if lmn2[q] >= 2:
            lowered = tuple(lmn2[k] - inc[k] for k in range(3))
            term -= 0.5 * lmn2[q] * (lmn2[q] - 1) * _overlap_prim(a, lmn1, ra, b, lowered, rb)
    return float(term)


def _hermite_coulomb(t_max: int, u_max: int, v_max: int, p: float,
                     pc: np.ndarray) -> np.ndarray:
    """R_{tuv}(p, PC) table with shape (t_max+1, u_max+1, v_max+1)."""
    n_max = t_max + u_max + v_max
    f = boys(n_max, float(p * pc @ pc))
    base = (-2.0 * p) ** np.arange(n_max + 1) * f
    # r[n][t,u,v] holds the auxiliary order-n tensor; fill by recursion
    r = np.zeros((n_max + 1, t_max + 1, u_max + 1, v_max + 1))
    r[:, 0, 0, 0] = base
    for t in range(t_max + 1):
        for u in range(u_max + 1):
            for v in range(v_max + 1):
                if t == u == v == 0:
                    continue
                for n in range(n_max - (t + u + v) + 1):
                    if t > 0:
                        val = pc[0] * r[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1) * r[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = pc[1] * r[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1) * r[n + 1, t, u - 2, v]
                    else:
                        val = pc[2] * r[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1) * r[n + 1, t, u, v - 2]
                    r[n, t, u, v] = val
    return r[0]


def _nuclear_prim(a, lmn1, ra, b, lmn2, rb, charges, centers) -> float:
    p = a + b
    rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    e_x = [hermite_e(l1, l2, t, ra[0] - rb[0], a, b) for t in range(l1 + l2 + 1)]
    e_y = [hermite_e(m1, m2, u, ra[1] - rb[1], a, b) for u in range(m1 + m2 + 1)]
    e_z = [hermite_e(n1, n2, v, ra[2] - rb[2], a, b) for v in range(n1 + n2 + 1)]
    total = 0.0
    for charge, rc in zip(charges, centers):
        r = _hermite_coulomb(l1 + l2, m1 + m2, n1 + n2, p, rp - np.asarray(rc))
        acc = 0.0
        for t, ex in enumerate(e_x):
            for u, ey in enumerate(e_y):
                for v, ez in enumerate(e_z):
                    acc += ex * ey * ez * r[t, u, v]
        total -= charge * acc
    return float(total * 2.0 * np.pi / p)


def primitive_norm(a: float, lmn: tuple[int, int, int]) -> float:
    l, m, n = lmn
    df = lambda k: 1.0 if k < 2 else float(np.prod(np.arange(2 * k - 1, 0, -2)))
    return float(
        (2 * a / np.pi) ** 0.75
        * (4 * a) ** ((l + m + n) / 2.0)
        / np.sqrt(df(l) * df(m) * df(n))
    )


class BasisSet:
    """Expanded list of contracted Cartesian AOs for a molecule."""

    def __init__(self, shells: list[Shell]):
        self.functions: list[tuple[tuple, tuple[int, int, int], np.ndarray, np.ndarray]] = []
        for sh in shells:
            for lmn in CARTESIANS[sh.l]:
                exps = np.asarray(sh.exponents)
                coefs = np.asarray(sh.coefficients) * np.array(
                    [primitive_norm(a, lmn) for a in sh.exponents]
                )
                self.functions.append((sh.center, lmn, exps, coefs))
        # renormalize each contracted function
        for idx, (ra, lmn, exps, coefs) in enumerate(self.functions):
            s = 0.0
            for a, ca in zip(exps, coefs):
                for b, cb in zip(exps, coefs):
                    s += ca * cb * _overlap_prim(a, lmn, ra, b, lmn, ra)
            self.functions[idx] = (ra, lmn, exps, coefs / np.sqrt(s))

    def __len__(self) -> int:
        return len(self.functions)

    def _pairwise(self, kernel) -> np.ndarray:
        n = len(self.functions)
        out = np.zeros((n, n))
        for i in range(n):
            ra, lmn1, ea, ca = self.functions[i]
            for j in range(i + 1):
                rb, lmn2, eb, cb = self.functions[j]
                val = 0.0
                for a, wa in zip(ea, ca):
                    for b, wb in zip(eb, cb):
                        val += wa * wb * kernel(a, lmn1, ra, b, lmn2, rb)
                out[i, j] = out[j, i] = val
        return out

    def overlap(self) -> np.ndarray:
        return self._pairwise(_overlap_prim)

    def kinetic(self) -> np.ndarray:
        return self._pairwise(_kinetic_prim)

    def nuclear(self, charges, centers) -> np.ndarray:
        centers = [np.asarray(c) for c in centers]
        return self._pairwise(
            lambda a, l1, ra, b, l2, rb: _nuclear_prim(a, l1, ra, b, l2, rb, charges, centers)
        )

    def electron_repulsion(self) -> np.ndarray:
        """Full (ij|kl) tensor in chemists' notation, 8-fold symmetrized."""
        n = len(self.functions)
        eri = np.zeros((n, n, n, n))
        pair_data = self._hermite_pairs()
        pairs = [(i, j) for i in range(n) for j in range(i + 1)]
        for ij, (i, j) in enumerate(pairs):
            for kl in range(ij + 1):
                k, l = pairs[kl]
                val = self._eri_contracted(pair_data[i, j], pair_data[k, l])
                for a, b in ((i, j), (j, i)):
                    for c, d in ((k, l), (l, k)):
                        eri[a, b, c, d] = val
                        eri[c, d, a, b] = val
        return eri

    def _hermite_pairs(self) -> dict:
        """Per AO pair: list of (p, P, coeff, E-tensor) over primitive pairs."""
        n = len(self.functions)
        data = {}
        for i in range(n):
            ra, lmn1, ea, ca = self.functions[i]
            for j in range(i + 1):
                rb, lmn2, eb, cb = self.functions[j]
                lx = lmn1[0] + lmn2[0]
                ly = lmn1[1] + lmn2[1]
                lz = lmn1[2] + lmn2[2]
                entries = []
                for a, wa in zip(ea, ca):
                    for b, wb in zip(eb, cb):
                        p = a + b
                        rp = (a * np.asarray(ra) + b * np.asarray(rb)) / p
                        e = np.zeros((lx + 1, ly + 1, lz + 1))
                        for t in range(lx + 1):
                            ex = hermite_e(lmn1[0], lmn2[0], t, ra[0] - rb[0], a, b)
                            for u in range(ly + 1):
                                ey = hermite_e(lmn1[1], lmn2[1], u, ra[1] - rb[1], a, b)
                                for v in range(lz + 1):
                                    e[t, u, v] = ex * ey * hermite_e(
                                        lmn1[2], lmn2[2], v, ra[2] - rb[2], a, b
                                    )
                        entries.append((p, rp, wa * wb, e))
                data[i, j] = entries
        return data

    @staticmethod
    def _eri_contracted(bra_entries, ket_entries) -> float:
        total = 0.0
        for p, rp, wab, e_bra in bra_entries:
            for q, rq, wcd, e_ket in ket_entries:
                alpha = p * q / (p + q)
                tm, um, vm = (s - 1 for s in e_bra.shape)
                tn, un, vn = (s - 1 for s in e_ket.shape)
                r = _hermite_coulomb(tm + tn, um + un, vm + vn, alpha, rp - rq)
                acc = 0.0
                for t in range(tm + 1):
                    for u in range(um + 1):
                        for v in range(vm + 1):
                            ebra = e_bra[t, u, v]
                            if ebra == 0.0:
                                continue
                            for tt in range(tn + 1):
                                for uu in range(un + 1):
                                    for vv in range(vn + 1):
                                        eket = e_ket[tt, uu, vv]
                                        if eket == 0.0:
                                            continue
                                        sign = -1.0 if (tt + uu + vv) & 1 else 1.0
                                        acc += ebra * eket * sign * r[t + tt, u + uu, v + vv]
                total += wab * wcd * acc * 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q))
        return total


def nuclear_repulsion(charges, centers) -> float:
    e = 0.0
    centers = [np.asarray(c) for c in centers]
    for i in range(len(charges)):
        for j in range(i):
            e += charges[i] * charges[j] / np.linalg.norm(centers[i] - centers[j])
    return float(e)
