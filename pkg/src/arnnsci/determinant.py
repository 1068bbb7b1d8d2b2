"""Bit-packed electronic configurations and symmetry-sector bookkeeping.

A configuration is an occupation bitstring over M spin-orbitals, stored in a
single Python int (M <= 64).  Bit q holds the occupation n_q of spin-orbital
q; bits 0..M/2-1 form the spin-down block and bits M/2..M-1 the spin-up
block.  Spatial orbital p (0 = lowest energy) sits at bit M/2-1-p in the
down block and at bit M-1-p in the up block, so the closed-shell reference
for 4 electrons in 8 spin-orbitals reads (0,0,1,1,0,0,1,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator, Sequence

MAX_ORBITALS = 64


@dataclass(frozen=True)
class Configuration:
    """Occupation bitstring of ``m`` spin-orbitals; bit q = n_q."""

    bits: int
    m: int

    def __post_init__(self) -> None:
        if not 0 < self.m <= MAX_ORBITALS:
            raise ValueError(f"need 1 <= M <= {MAX_ORBITALS}, got {self.m}")
        if self.bits < 0 or self.bits >> self.m:
            raise ValueError("bits outside the M-orbital register")

    @classmethod
    def from_occupations(cls, occ: Sequence[int]) -> "Configuration":
        """Build from an iterable (n_0, ..., n_{M-1})."""
        bits = 0
        for q, n in enumerate(occ):
            if n not in (0, 1):
                raise ValueError("occupations must be 0 or 1")
            bits |= n << q
        return cls(bits, len(occ))

    @classmethod
    def from_text(cls, text: str) -> "Configuration":
        """Parse the comma-free 0/1 string form, read as (n_0, ..., n_{M-1})."""
        return cls.from_occupations([int(ch) for ch in text.strip()])

    def to_text(self) -> str:
        return "".join(str((self.bits >> q) & 1) for q in range(self.m))

    def occupation(self, q: int) -> int:
        return (self.bits >> q) & 1

    def occupied(self) -> list[int]:
        """Indices of set bits, ascending."""
        return [q for q in range(self.m) if (self.bits >> q) & 1]

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def lex_key(self) -> int:
        """Integer that sorts configurations lexicographically by text form."""
        return _bit_reverse(self.bits, self.m)

    def __repr__(self) -> str:  # compact in test output
        return f"Configuration({self.to_text()})"


@dataclass(frozen=True)
class SymmetrySector:
    """Electron number, spin balance and Abelian point-group constraints.

    Irreps are XOR bitmasks in {0..7}: the Molpro FCIDUMP label k maps to
    bitmask k-1, under which the representation product is plain XOR (valid
    for D2h and all its subgroups).
    """

    n_electrons: int
    require_sz_zero: bool
    target_irrep: int
    orbital_irreps: tuple[int, ...]

    def __post_init__(self) -> None:
        labels = (self.target_irrep, *self.orbital_irreps)
        if any(not 0 <= g <= 7 for g in labels):
            raise ValueError("irrep bitmasks must lie in 0..7")
        if self.require_sz_zero and self.n_electrons % 2:
            raise ValueError("Sz = 0 requires an even electron count")


def _bit_reverse(bits: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (bits & 1)
        bits >>= 1
    return out


def spatial_of_bit(q: int, m: int) -> tuple[int, int]:
    """Map bit index -> (spatial orbital, spin) with spin 0=down, 1=up."""
    half = m // 2
    if q < half:
        return half - 1 - q, 0
    return m - 1 - q, 1


def bit_of_spatial(p: int, spin: int, m: int) -> int:
    half = m // 2
    return (half - 1 - p) if spin == 0 else (m - 1 - p)


def hf_configuration(m: int, n_electrons: int) -> Configuration:
    """Aufbau closed-shell determinant: lowest spatial orbitals, both spins."""
    if n_electrons % 2:
        raise ValueError("closed-shell reference needs an even electron count")
    bits = 0
    for p in range(n_electrons // 2):
        bits |= 1 << bit_of_spatial(p, 0, m)
        bits |= 1 << bit_of_spatial(p, 1, m)
    return Configuration(bits, m)


def popcount_block(c: Configuration, block: str) -> int:
    """Number of occupied spin-orbitals in the 'down' or 'up' half."""
    if c.m % 2:
        raise ValueError("M must be even to split into spin blocks")
    half = c.m // 2
    if block == "down":
        return bin(c.bits & ((1 << half) - 1)).count("1")
    if block == "up":
        return bin(c.bits >> half).count("1")
    raise ValueError(f"block must be 'down' or 'up', got {block!r}")


def config_irrep(c: Configuration, orbital_irreps: Sequence[int]) -> int:
    """XOR of the irrep labels of all occupied spatial orbitals."""
    g = 0
    for q in c.occupied():
        p, _ = spatial_of_bit(q, c.m)
        g ^= orbital_irreps[p]
    return g


def passes_symmetry(c: Configuration, s: SymmetrySector) -> bool:
    """True iff c has the sector's electron count, spin balance and irrep."""
    if c.m != 2 * len(s.orbital_irreps):
        raise ValueError(
            f"configuration has M={c.m} but sector describes {2 * len(s.orbital_irreps)}"
        )
    if c.popcount() != s.n_electrons:
        return False
    if s.require_sz_zero and popcount_block(c, "down") != popcount_block(c, "up"):
        return False
    return config_irrep(c, s.orbital_irreps) == s.target_irrep


def count_sector(m: int, n_electrons: int | None, sz_zero: bool = True) -> int:
    """Configuration counts without irrep filtering.

    ``n_electrons=None`` counts the full Fock space 2^M.  With Sz = 0 the
    count is C(M/2, N_e/2)^2, otherwise C(M, N_e).
    """
    if n_electrons is None:
        return 1 << m
    if not 0 <= n_electrons <= m:
        raise ValueError("electron count outside [0, M]")
    if not sz_zero:
        return comb(m, n_electrons)
    if n_electrons % 2:
        raise ValueError("Sz = 0 requires an even electron count")
    if m % 2:
        raise ValueError("Sz = 0 split requires even M")
    return comb(m // 2, n_electrons // 2) ** 2


def count_symmetry_sector(s: SymmetrySector, m: int) -> int:
    """Exact size of the irrep-filtered sector, without enumerating it.

    Counts k-subsets of spatial orbitals per XOR label by dynamic
    programming over the orbital list, then pairs down/up blocks.
    """
    half = m // 2
    if half != len(s.orbital_irreps):
        raise ValueError("sector irreps inconsistent with M")
    table = _subset_irrep_counts(s.orbital_irreps)
    total = 0
    for n_down, n_up in _spin_splits(s, half):
        for g in range(8):
            total += table[n_down][g] * table[n_up][s.target_irrep ^ g]
    return total


def _spin_splits(s: SymmetrySector, half: int) -> list[tuple[int, int]]:
    n_e = s.n_electrons
    if s.require_sz_zero:
        return [(n_e // 2, n_e // 2)]
    lo = max(0, n_e - half)
    hi = min(n_e, half)
    return [(d, n_e - d) for d in range(lo, hi + 1)]


def _subset_irrep_counts(irreps: tuple[int, ...]) -> list[list[int]]:
    """table[k][g] = number of k-subsets of the orbitals with XOR label g."""
    n = len(irreps)
    table = [[0] * 8 for _ in range(n + 1)]
    table[0][0] = 1
    for gp in irreps:
        for k in range(min(n, len(table) - 1), 0, -1):
            row, prev = table[k], table[k - 1]
            for g in range(8):
                row[g] += prev[g ^ gp]
    return table


ENUMERATION_GUARD = 10**8


@lru_cache(maxsize=64)
def _block_patterns(half: int, k: int) -> tuple[int, ...]:
    """All k-electron patterns of one spin block, in text-lexicographic order."""
    pats = [sum(1 << i for i in pos) for pos in combinations(range(half), k)]
    pats.sort(key=lambda b: _bit_reverse(b, half))
    return tuple(pats)


def enumerate_sector(s: SymmetrySector, m: int) -> Iterator[Configuration]:
    """Yield every configuration passing the sector filter, in lexicographic
    order of the text form, each exactly once."""
    half = m // 2
    if half != len(s.orbital_irreps):
        raise ValueError("sector irreps inconsistent with M")
    if count_sector(m, s.n_electrons, s.require_sz_zero) > ENUMERATION_GUARD:
        raise ValueError(
            f"sector exceeds the enumeration guard of {ENUMERATION_GUARD}"
        )
    for n_down, n_up in _spin_splits(s, half):
        if n_down > half or n_up > half:
            continue
        downs = _block_patterns(half, n_down)
        ups = _block_patterns(half, n_up)
        up_by_irrep: dict[int, list[int]] = {}
        for u in ups:
            up_by_irrep.setdefault(_pattern_irrep(u, s.orbital_irreps, half), []).append(u)
        for d in downs:
            need = s.target_irrep ^ _pattern_irrep(d, s.orbital_irreps, half)
            for u in up_by_irrep.get(need, ()):
                yield Configuration(d | (u << half), m)


def _pattern_irrep(pattern: int, irreps: Sequence[int], half: int) -> int:
    # within a block, bit i maps to spatial orbital half-1-i for either spin
    g = 0
    i = 0
    while pattern:
        if pattern & 1:
            g ^= irreps[half - 1 - i]
        pattern >>= 1
        i += 1
    return g


def excitations(c: Configuration, order: str) -> Iterator[Configuration]:
    """Spin-preserving single or double excitations of c, each once.

    Doubles conserve the per-spin electron counts: both moves in one block,
    or one move per block.
    """
    if order not in ("singles", "doubles"):
        raise ValueError(f"order must be 'singles' or 'doubles', got {order!r}")
    half = c.m // 2
    blocks = []
    for lo, hi in ((0, half), (half, c.m)):
        occ = [q for q in range(lo, hi) if (c.bits >> q) & 1]
        vac = [q for q in range(lo, hi) if not (c.bits >> q) & 1]
        blocks.append((occ, vac))
    if order == "singles":
        for occ, vac in blocks:
            for i in occ:
                for a in vac:
                    yield Configuration(c.bits ^ (1 << i) | (1 << a), c.m)
        return
    # same-spin doubles
    for occ, vac in blocks:
        for i, j in combinations(occ, 2):
            for a, b in combinations(vac, 2):
                yield Configuration(
                    c.bits ^ (1 << i) ^ (1 << j) | (1 << a) | (1 << b), c.m
                )
    # one move per spin block
    (occ_d, vac_d), (occ_u, vac_u) = blocks
    for i in occ_d:
        for a in vac_d:
            for j in occ_u:
                for b in vac_u:
                    yield Configuration(
                        c.bits ^ (1 << i) ^ (1 << j) | (1 << a) | (1 << b), c.m
                    )
