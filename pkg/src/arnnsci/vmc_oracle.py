"""Validation oracles: local-energy estimator and the reweighted energy
functional that reduces subspace optimization to exact diagonalization.

Diagnostics only; nothing here runs on the iteration hot path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .determinant import Configuration
from .eigensolver import SparseState
from .integrals import IntegralTable, assemble_subspace, slater_condon
from .trainer import TrainingSet


@dataclass(frozen=True)
class LocalEnergySample:
    config: Configuration
    e_loc: float
    weight: int


def local_energy(psi: SparseState, c: Configuration, t: IntegralTable) -> float:
    """sum_n' H_{c n'} psi(n') / psi(c), with psi = 0 outside the support."""
    amp_c = psi.amplitude_of(c)
    if amp_c == 0.0:
        raise ValueError("local energy is undefined at zero amplitude")
    total = 0.0
    for other, amp in zip(psi.support, psi.amplitudes):
        if amp == 0.0:
            continue
        element = slater_condon(c, other, t)
        if element.excitation_degree <= 2 and element.value != 0.0:
            total += element.value * amp
    return total / amp_c


def local_energy_expectation(psi: SparseState, t: IntegralTable) -> float:
    """Born-weighted average of the local energy over the support."""
    probs = psi.born_probabilities()
    acc = 0.0
    for c, p in zip(psi.support, probs):
        if p > 0.0:
            acc += p * local_energy(psi, c, t)
    return acc


def upsilon_lambda(psi0: SparseState, counts: TrainingSet, phases: np.ndarray,
                   t: IntegralTable) -> tuple[float, float]:
    """Empirical energy functional over the sampled subspace.

    The subspace is psi0's support; amplitudes come from the empirical
    frequencies sqrt(N_n / |S|) and the per-configuration phase angles in
    ``phases`` (real, radians, aligned with the support).  Returns
    (Upsilon, Lambda); Lambda is exactly 1 for real phases.
    """
    support = psi0.support
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != (len(support),):
        raise ValueError("phases must align with the reference support")
    index = {c.bits: i for i, c in enumerate(support)}
    amp = np.zeros(len(support))
    total = counts.total
    for c, k in counts.entries:
        try:
            amp[index[c.bits]] = np.sqrt(k / total)
        except KeyError:
            raise ValueError("counts support must lie inside the reference support") from None
    h = assemble_subspace(list(support), t)
    v = np.exp(1j * phases) * amp
    upsilon = float(np.real(np.conj(v) @ (h @ v)))
    return upsilon, 1.0


def mh_ratio(psi: SparseState, current: Configuration, proposal: Configuration) -> float:
    """Metropolis acceptance ratio |psi(n')|^2 / |psi(n)|^2."""
    amp = psi.amplitude_of(current)
    if amp == 0.0:
        raise ValueError("ratio undefined at zero-amplitude current configuration")
    return psi.amplitude_of(proposal) ** 2 / amp**2
