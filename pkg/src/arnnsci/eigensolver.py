"""Lowest eigenpair of subspace Hamiltonians and the exact-FCI oracle."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .determinant import Configuration, SymmetrySector, count_symmetry_sector, enumerate_sector
from .integrals import IntegralTable, assemble_subspace

DENSE_CUTOFF = 2000
LANCZOS_MAXITER = 500
DEGENERACY_WARN_GAP = 1e-8
FCI_GUARD = 10**6
CHEMICAL_ACCURACY = 1.6e-3


@dataclass(frozen=True)
class SparseState:
    """Normalized real wavefunction over an explicit determinant support."""

    support: tuple[Configuration, ...]
    amplitudes: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        if len(self.support) != self.amplitudes.shape[0]:
            raise ValueError("support and amplitudes disagree in length")
        if len({c.bits for c in self.support}) != len(self.support):
            raise ValueError("support contains duplicates")
        norm = float(self.amplitudes @ self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm!r}")

    def born_probabilities(self) -> np.ndarray:
        return self.amplitudes**2

    def amplitude_of(self, c: Configuration) -> float:
        try:
            return float(self.amplitudes[self._index()[c.bits]])
        except KeyError:
            return 0.0

    def _index(self) -> dict[int, int]:
        cached = getattr(self, "_index_cache", None)
        if cached is None:
            cached = {c.bits: i for i, c in enumerate(self.support)}
            object.__setattr__(self, "_index_cache", cached)
        return cached


def lowest_eigenpair(h_sub, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """(lowest eigenvalue, eigenvector) of a symmetric matrix.

    Dense solve up to 2000 rows, Lanczos above; the residual is re-verified
    with one explicit matvec.  Sign convention: the largest-magnitude entry
    of the eigenvector is positive.
    """
    n = h_sub.shape[0]
    if n == 0:
        raise ValueError("empty subspace")
    if n == 1:
        e = float(h_sub[0, 0])
        return e, np.ones(1)
    if n <= DENSE_CUTOFF:
        dense = h_sub.toarray() if sp.issparse(h_sub) else np.asarray(h_sub)
        evals, evecs = np.linalg.eigh(dense)
        energy, vec = float(evals[0]), evecs[:, 0]
        if evals.shape[0] > 1 and evals[1] - evals[0] < DEGENERACY_WARN_GAP:
            warnings.warn("degenerate ground state; sign convention applied", stacklevel=2)
    else:
        diag = h_sub.diagonal()
        v0 = np.zeros(n)
        v0[int(np.argmin(diag))] = 1.0
        try:
            evals, evecs = spla.eigsh(
                h_sub, k=1, which="SA", tol=1e-12, maxiter=LANCZOS_MAXITER, v0=v0
            )
        except spla.ArpackNoConvergence as err:
            if err.eigenvalues.size == 0:
                raise RuntimeError("Lanczos failed to converge and has no estimate") from err
            evals, evecs = err.eigenvalues, err.eigenvectors
            res = np.linalg.norm(h_sub @ evecs[:, 0] - evals[0] * evecs[:, 0])
            raise RuntimeError(
                f"Lanczos hit the iteration cap; best residual {res:.3e}"
            ) from err
        energy, vec = float(evals[0]), evecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    residual = float(np.linalg.norm(h_sub @ vec - energy * vec))
    if residual > max(tol, 1e-12):
        raise RuntimeError(f"eigenpair residual {residual:.3e} exceeds tol {tol:.3e}")
    lead = int(np.argmax(np.abs(vec)))
    if vec[lead] < 0:
        vec = -vec
    return energy, vec


def solve_subspace(basis: list[Configuration], t: IntegralTable,
                   tol: float = 1e-9) -> SparseState:
    """Assemble and diagonalize; returns the ground state over ``basis``."""
    h = assemble_subspace(list(basis), t)
    energy, vec = lowest_eigenpair(h, tol)
    return SparseState(tuple(basis), vec, energy)


def fci_reference(t: IntegralTable, s: SymmetrySector | None = None) -> SparseState:
    """Exact ground state over the full symmetry sector (guarded)."""
    s = t.sector() if s is None else s
    size = count_symmetry_sector(s, t.m)
    if size > FCI_GUARD:
        raise ValueError(f"sector size {size} exceeds the FCI guard of {FCI_GUARD}")
    if size == 0:
        raise ValueError("symmetry sector is empty")
    basis = list(enumerate_sector(s, t.m))
    return solve_subspace(basis, t)


def sorted_by_born(gs: SparseState) -> list[Configuration]:
    """Support sorted by descending Born probability, ties lexicographic."""
    probs = gs.born_probabilities()
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], gs.support[i].lex_key()))
    return [gs.support[i] for i in order]


def n_ca(gs: SparseState, t: IntegralTable, chem_acc: float = CHEMICAL_ACCURACY) -> int:
    """Minimum count of Born-sorted configurations whose subspace reaches
    the exact energy within ``chem_acc``; galloping search plus bisection,
    one eigensolve per probe."""
    ranked = sorted_by_born(gs)
    total = len(ranked)

    def passes(k: int) -> bool:
        energy, _ = lowest_eigenpair(assemble_subspace(ranked[:k], t))
        return energy - gs.energy <= chem_acc

    if passes(1):
        return 1
    lo = 1  # largest known failure
    hi = 2
    while hi < total and not passes(hi):
        lo = hi
        hi = min(2 * hi, total)
    # invariant: lo fails, hi passes (the full support always passes)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi
