"""Restricted Hartree-Fock with DIIS, plus the MO-basis integral transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import CHARGES, shells_for
from .gaussians import ANGSTROM_TO_BOHR, BasisSet, nuclear_repulsion
from .molecules import MoleculeSpec


@dataclass
class ScfResult:
    energy: float
    mo_energies: np.ndarray
    mo_coefficients: np.ndarray  # AO x MO
    n_occupied: int
    overlap: np.ndarray
    hcore: np.ndarray
    eri_ao: np.ndarray
    nuclear_energy: float
    charges: list[int]
    centers: list[np.ndarray]
    basis: BasisSet


def build_system(spec: MoleculeSpec):
    charges, centers, shells = [], [], []
    for element, xyz in spec.geometry:
        center = tuple(c * ANGSTROM_TO_BOHR for c in xyz)
        charges.append(CHARGES[element])
        centers.append(np.asarray(center))
        shells.extend(shells_for(element, center, spec.basis))
    return charges, centers, BasisSet(shells)


def run_rhf(spec: MoleculeSpec, conv: float = 1e-11, max_cycles: int = 200) -> ScfResult:
    charges, centers, basis = build_system(spec)
    n_elec = sum(charges) - spec.charge
    if n_elec % 2:
        raise ValueError("RHF needs an even electron count")
    nocc = n_elec // 2

    s = basis.overlap()
    hcore = basis.kinetic() + basis.nuclear(charges, centers)
    eri = basis.electron_repulsion()
    e_nuc = nuclear_repulsion(charges, centers)

    evals, evecs = np.linalg.eigh(s)
    if evals.min() < 1e-10:
        raise RuntimeError("linearly dependent basis")
    x = evecs @ np.diag(evals**-0.5) @ evecs.T

    def fock(d):
        j = np.einsum("pqrs,rs->pq", eri, d)
        k = np.einsum("prqs,rs->pq", eri, d)
        return hcore + j - 0.5 * k

    d = np.zeros_like(s)
    errors: list[np.ndarray] = []
    focks: list[np.ndarray] = []
    energy = 0.0
    for cycle in range(max_cycles):
        f = fock(d)
        if cycle > 0:
            err = f @ d @ s - s @ d @ f
            errors.append(err)
            focks.append(f)
            if len(errors) > 8:
                errors.pop(0)
                focks.pop(0)
            if len(errors) > 1:
                f = _diis_extrapolate(errors, focks)
        f_ortho = x.T @ f @ x
        e_mo, c_ortho = np.linalg.eigh(f_ortho)
        c = x @ c_ortho
        d_new = 2.0 * c[:, :nocc] @ c[:, :nocc].T
        e_new = 0.5 * np.sum(d_new * (hcore + fock(d_new))) + e_nuc
        if cycle > 0 and abs(e_new - energy) < conv and np.max(np.abs(d_new - d)) < 1e-8:
            energy = e_new
            d = d_new
            break
        energy = e_new
        d = d_new
    else:
        raise RuntimeError("SCF failed to converge")

    # one clean diagonalization of the converged Fock operator
    f = fock(d)
    e_mo, c_ortho = np.linalg.eigh(x.T @ f @ x)
    c = x @ c_ortho
    return ScfResult(
        energy=float(energy),
        mo_energies=e_mo,
        mo_coefficients=c,
        n_occupied=nocc,
        overlap=s,
        hcore=hcore,
        eri_ao=eri,
        nuclear_energy=e_nuc,
        charges=charges,
        centers=centers,
        basis=basis,
    )


def _diis_extrapolate(errors, focks) -> np.ndarray:
    n = len(errors)
    b = -np.ones((n + 1, n + 1))
    b[n, n] = 0.0
    for i in range(n):
        for j in range(n):
            b[i, j] = np.sum(errors[i] * errors[j])
    rhs = np.zeros(n + 1)
    rhs[n] = -1.0
    try:
        coefs = np.linalg.solve(b, rhs)[:n]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(c * f for c, f in zip(coefs, focks))


def transform_to_mo(res: ScfResult, c: np.ndarray | None = None):
    """Return (h1_mo, eri_mo chemists') for the given MO coefficients."""
    c = res.mo_coefficients if c is None else c
    h1 = c.T @ res.hcore @ c
    eri = np.einsum("pqrs,pi->iqrs", res.eri_ao, c, optimize=True)
    eri = np.einsum("iqrs,qj->ijrs", eri, c, optimize=True)
    eri = np.einsum("ijrs,rk->ijks", eri, c, optimize=True)
    eri = np.einsum("ijks,sl->ijkl", eri, c, optimize=True)
    return h1, eri
