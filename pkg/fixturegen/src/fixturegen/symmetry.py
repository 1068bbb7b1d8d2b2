"""Abelian point-group detection and MO irrep assignment.

Molecules must be supplied in a symmetry-adapted orientation: mirror planes
on the coordinate planes, principal axis on z.  Irreps are read off as
parities under the coordinate reflections, which maps directly onto the
Molpro FCIDUMP numbering for D2h, C2v, Cs and C1 (label = XOR bitmask + 1
with x-odd -> bit 1, y-odd -> bit 2, z-odd -> bit 4).
"""

from __future__ import annotations

import numpy as np

from .scf import ScfResult

# reflection name -> flipped axis; XOR bits are assigned per molecule below
REFLECTIONS = {"syz": 0, "sxz": 1, "sxy": 2}
REFLECTION_ORDER = ("syz", "sxz", "sxy")

GROUP_NAMES = {
    frozenset(): "C1",
    frozenset({"syz"}): "Cs",
    frozenset({"sxz"}): "Cs",
    frozenset({"sxy"}): "Cs",
    frozenset({"syz", "sxz"}): "C2v",
    frozenset({"syz", "sxz", "sxy"}): "D2h",
}

DEGENERACY_TOL = 1e-7
PARITY_TOL = 1e-6


def detect_reflections(charges, centers, tol: float = 1e-8) -> list[str]:
    present = []
    for name in REFLECTION_ORDER:
        axis = REFLECTIONS[name]
        ok = True
        for z, c in zip(charges, centers):
            image = c.copy()
            image[axis] = -image[axis]
            if not any(
                z == z2 and np.linalg.norm(image - c2) < tol
                for z2, c2 in zip(charges, centers)
            ):
                ok = False
                break
        if ok:
            present.append(name)
    return present


def _ao_reflection_matrix(basis, axis: int, tol: float = 1e-8) -> np.ndarray:
    """Signed permutation acting on AO coefficients under one reflection."""
    n = len(basis)
    funcs = basis.functions
    mat = np.zeros((n, n))
    for i, (center, lmn, exps, coefs) in enumerate(funcs):
        image = np.asarray(center, dtype=float)
        image[axis] = -image[axis]
        sign = -1.0 if lmn[axis] % 2 else 1.0
        for j, (center2, lmn2, exps2, coefs2) in enumerate(funcs):
            if (
                lmn2 == lmn
                and np.array_equal(exps2, exps)
                and np.linalg.norm(np.asarray(center2) - image) < tol
            ):
                mat[j, i] = sign
                break
        else:
            raise ValueError("basis is not closed under the claimed reflection")
    return mat


def assign_irreps(res: ScfResult) -> tuple[np.ndarray, np.ndarray, list[int], str]:
    """Purify degenerate MOs and return (energies, coefficients, orbsym, group).

    ``orbsym`` carries Molpro 1-based labels.  Raises if the detected mirror
    set is one this scheme cannot label (reorient the molecule instead).
    """
    present = detect_reflections(res.charges, res.centers)
    key = frozenset(present)
    if key not in GROUP_NAMES:
        raise ValueError(f"unsupported mirror combination {sorted(present)}; reorient")
    group = GROUP_NAMES[key]
    bit_of_op = {name: 1 << idx for idx, name in enumerate(present)}

    c = res.mo_coefficients.copy()
    energies = res.mo_energies.copy()
    s = res.overlap
    ops = {name: _ao_reflection_matrix(res.basis, REFLECTIONS[name]) for name in present}

    blocks = _degenerate_blocks(energies)
    for name in present:
        p = ops[name]
        new_blocks = []
        for blk in blocks:
            sub = c[:, blk]
            rep = sub.T @ s @ (p @ sub)
            rep = 0.5 * (rep + rep.T)
            if np.allclose(rep, np.diag(np.diag(rep)), atol=1e-10):
                rot = np.eye(len(blk))
                chars = np.diag(rep)
            else:
                chars, rot = np.linalg.eigh(rep)
                c[:, blk] = sub @ rot
            for val in (-1.0, 1.0):
                piece = [blk[k] for k in range(len(blk)) if abs(chars[k] - val) < PARITY_TOL]
                if piece:
                    new_blocks.append(piece)
            if not np.all(np.abs(np.abs(chars) - 1.0) < PARITY_TOL):
                raise ValueError("reflection characters are not +-1; degeneracy tangle")
        blocks = new_blocks

    # canonical signs: largest-coefficient entry positive
    for k in range(c.shape[1]):
        lead = np.argmax(np.abs(c[:, k]))
        if c[lead, k] < 0:
            c[:, k] = -c[:, k]

    orbsym = []
    for k in range(c.shape[1]):
        label = 0
        for name in present:
            p = ops[name]
            parity = float(c[:, k] @ s @ (p @ c[:, k]))
            if abs(abs(parity) - 1.0) > PARITY_TOL:
                raise ValueError(f"MO {k} has impure parity {parity:.6f} under {name}")
            if parity < 0:
                label |= bit_of_op[name]
        orbsym.append(label + 1)  # Molpro 1-based, XOR-consistent numbering
    return energies, c, orbsym, group


def _degenerate_blocks(energies: np.ndarray) -> list[list[int]]:
    blocks: list[list[int]] = []
    for k, e in enumerate(energies):
        if blocks and abs(e - energies[blocks[-1][-1]]) < DEGENERACY_TOL:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return blocks
