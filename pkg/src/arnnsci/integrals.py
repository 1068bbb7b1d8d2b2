"""FCIDUMP ingestion and Slater-Condon matrix elements.

The Hamiltonian is the standard second-quantized electronic form: one-body
coefficients h_pq plus two-body coefficients stored here in chemists'
notation, (pq|rs), with the full 8-fold permutational symmetry.  In terms
of spin-orbitals I=(p,s) the two-electron part reads

    1/2 sum_{pqrs} sum_{s,t} (pq|rs) a+_{p,s} a+_{r,t} a_{s,t} a_{q,s}

so that matrix elements between determinants follow the Slater-Condon
rules with antisymmetrized combinations built at evaluation time.
"""

from __future__ import annotations

import io
import re
import warnings
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp

from .determinant import (
    Configuration,
    SymmetrySector,
    spatial_of_bit,
)

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class IntegralTable:
    """Molecular integrals over spatial orbitals, plus sector metadata."""

    n_spatial: int
    n_electrons: int
    ms2: int
    core_energy: float
    h1: np.ndarray
    h2: np.ndarray
    orbital_irreps: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.n_spatial
        if 2 * n > 64:
            raise ValueError("more than 32 spatial orbitals is unsupported")
        if self.h1.shape != (n, n) or self.h2.shape != (n, n, n, n):
            raise ValueError("integral arrays inconsistent with n_spatial")
        if len(self.orbital_irreps) != n:
            raise ValueError("need one irrep label per spatial orbital")
        if not np.allclose(self.h1, self.h1.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise ValueError("h1 is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(self.h2, self.h2.transpose(perm), atol=SYMMETRY_TOL, rtol=0.0):
                raise ValueError("h2 violates 8-fold permutational symmetry")

    @property
    def m(self) -> int:
        """Number of spin-orbitals."""
        return 2 * self.n_spatial

    def sector(self, target_irrep: int = 0, sz_zero: bool = True) -> SymmetrySector:
        """The physical sector for this system's electron count."""
        return SymmetrySector(self.n_electrons, sz_zero, target_irrep, self.orbital_irreps)


@dataclass(frozen=True)
class MatrixElement:
    value: float
    excitation_degree: int


_NAMELIST_KV = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=(?:[,\s][A-Za-z][A-Za-z0-9_]*\s*=)|$)")


def parse_fcidump(source: str | bytes | IO) -> IntegralTable:
    """Parse an FCIDUMP (Molpro conventions, chemists' notation, 1-based).

    Lines of the form ``value i j k l`` fill the two-electron table when all
    four indices are nonzero, the one-electron table when k = l = 0, and the
    core energy when all indices are zero.  The stored tables are completed
    to full permutational symmetry.
    """
    if isinstance(source, bytes):
        text = source.decode("ascii")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("ascii")
    header, body = _split_header(text)
    fields = _parse_namelist(header)
    try:
        n = int(fields["NORB"])
        nelec = int(fields["NELEC"])
    except KeyError as missing:
        raise ValueError(f"FCIDUMP header lacks {missing.args[0]}") from None
    ms2 = int(fields.get("MS2", 0))
    orbsym = fields.get("ORBSYM")
    if orbsym is None:
        irreps = (0,) * n
    else:
        labels = [int(tok) for tok in re.split(r"[,\s]+", orbsym.strip(" ,")) if tok]
        if len(labels) != n:
            raise ValueError("ORBSYM length disagrees with NORB")
        if any(k < 1 or k > 8 for k in labels):
            raise ValueError("ORBSYM labels must be Molpro integers in 1..8")
        irreps = tuple(k - 1 for k in labels)

    h1 = np.zeros((n, n))
    h2 = np.zeros((n, n, n, n))
    core = None
    for raw in io.StringIO(body):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"malformed integral line: {line!r}")
        val = float(parts[0].replace("D", "E").replace("d", "e"))
        i, j, k, l = (int(tok) for tok in parts[1:])
        if min(i, j, k, l) < 0 or max(i, j, k, l) > n:
            raise ValueError(f"orbital index out of range in line: {line!r}")
        if i == j == k == l == 0:
            core = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                # single-index lines (orbital energies) carry no H information
                continue
            h1[i - 1, j - 1] = val
            h1[j - 1, i - 1] = val
        elif i and j and k and l:
            for a, b, c, d in _chemist_perms(i - 1, j - 1, k - 1, l - 1):
                h2[a, b, c, d] = val
        else:
            raise ValueError(f"malformed index pattern in line: {line!r}")
    if core is None:
        warnings.warn("FCIDUMP has no core-energy line; assuming 0", stacklevel=2)
        core = 0.0
    return IntegralTable(n, nelec, ms2, core, h1, h2, irreps)


def load_fcidump(path) -> IntegralTable:
    with open(path, "rb") as fh:
        return parse_fcidump(fh)


def _split_header(text: str) -> tuple[str, str]:
    m = re.search(r"(&END|/)", text, flags=re.IGNORECASE)
    if not m or not text.lstrip().upper().startswith("&FCI"):
        raise ValueError("FCIDUMP namelist header not found")
    return text[: m.start()], text[m.end():]


def _parse_namelist(header: str) -> dict[str, str]:
    stripped = header.lstrip()[4:]  # drop &FCI
    flat = " ".join(stripped.splitlines())
    return {k.upper(): v.strip(" ,") for k, v in _NAMELIST_KV.findall(flat)}


def _chemist_perms(p: int, q: int, r: int, s: int) -> Iterable[tuple[int, int, int, int]]:
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def _jw_phase(bits: int, q: int) -> int:
    """Sign picked up by a ladder operator at q acting through lower bits."""
    return -1 if bin(bits & ((1 << q) - 1)).count("1") & 1 else 1


def slater_condon(a: Configuration, b: Configuration, t: IntegralTable) -> MatrixElement:
    """Hamiltonian matrix element <a|H|b> via the Slater-Condon rules."""
    if a.m != b.m or a.m != t.m:
        raise ValueError("configurations and integrals live in different Fock spaces")
    diff = a.bits ^ b.bits
    n_removed = bin(diff & a.bits).count("1")
    n_added = bin(diff & b.bits).count("1")
    degree = max(n_removed, n_added)
    if n_removed != n_added or degree > 2:
        # H conserves particle number and moves at most two electrons
        return MatrixElement(0.0, degree)
    spat = [spatial_of_bit(q, t.m) for q in range(t.m)]
    h1, h2 = t.h1, t.h2

    if degree == 0:
        occ = a.occupied()
        val = t.core_energy
        for u in occ:
            val += h1[spat[u][0], spat[u][0]]
        for ui in range(len(occ)):
            pu, su = spat[occ[ui]]
            for vi in range(ui + 1, len(occ)):
                pv, sv = spat[occ[vi]]
                val += h2[pu, pu, pv, pv]
                if su == sv:
                    val -= h2[pu, pv, pv, pu]
        return MatrixElement(val, 0)

    if degree == 1:
        i = (diff & a.bits).bit_length() - 1
        x = (diff & b.bits).bit_length() - 1
        pi, si = spat[i]
        px, sx = spat[x]
        if si != sx:
            return MatrixElement(0.0, 1)
        lo, hi = sorted((i, x))
        between = a.bits & ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
        sign = -1 if bin(between).count("1") & 1 else 1
        val = h1[pi, px]
        common = a.bits & ~(1 << i)
        for u in range(t.m):
            if (common >> u) & 1:
                pu, su = spat[u]
                val += h2[pi, px, pu, pu]
                if su == si:
                    val -= h2[pi, pu, pu, px]
        return MatrixElement(sign * val, 1)

    # degree == 2: i < j leave, x < y arrive
    removed = diff & a.bits
    added = diff & b.bits
    j = removed.bit_length() - 1
    i = (removed ^ (1 << j)).bit_length() - 1
    y = added.bit_length() - 1
    x = (added ^ (1 << y)).bit_length() - 1
    pi, si = spat[i]
    pj, sj = spat[j]
    px, sx = spat[x]
    py, sy = spat[y]
    direct = h2[pi, px, pj, py] if (si == sx and sj == sy) else 0.0
    exchange = h2[pi, py, pj, px] if (si == sy and sj == sx) else 0.0
    if direct == 0.0 and exchange == 0.0 and (si + sj) != (sx + sy):
        return MatrixElement(0.0, 2)
    sign = 1
    bits = a.bits
    for q in (i, j):
        sign *= _jw_phase(bits, q)
        bits ^= 1 << q
    for q in (y, x):
        sign *= _jw_phase(bits, q)
        bits |= 1 << q
    return MatrixElement(sign * (direct - exchange), 2)


def assemble_subspace(basis: list[Configuration], t: IntegralTable) -> sp.csr_matrix:
    """Sparse symmetric Hamiltonian over an ordered determinant basis.

    For more than 5000 determinants only excitation-connected pairs are
    visited; the all-pairs route is never taken on large bases.
    """
    from ._kernels import assemble_coo  # deferred: numba compile on first use

    n = len(basis)
    if n == 0:
        raise ValueError("empty basis")
    keys = np.fromiter((c.bits for c in basis), dtype=np.uint64, count=n)
    if len(np.unique(keys)) != n:
        raise ValueError("duplicate configurations in basis")
    m = basis[0].m
    if any(c.m != m for c in basis) or m != t.m:
        raise ValueError("basis and integrals live in different Fock spaces")
    rows, cols, vals = assemble_coo(keys, t)
    upper = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    strict = sp.triu(upper, k=1)
    return (upper + strict.T).tocsr()
