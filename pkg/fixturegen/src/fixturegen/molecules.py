"""Geometry registry (Angstrom, symmetry-adapted orientations).

Orientations put the principal axis on z and any mirror planes on the
coordinate planes, so irrep assignment can read parities directly.
Geometries are standard experimental or benchmark values; see each note.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MoleculeSpec:
    name: str
    geometry: tuple[tuple[str, tuple[float, float, float]], ...]
    basis: str = "sto-3g"
    charge: int = 0
    multiplicity: int = 1
    point_group_hint: str = ""
    note: str = ""

    def __post_init__(self) -> None:
        if self.charge != 0 or self.multiplicity != 1:
            raise ValueError("only neutral singlets are supported")


MOLECULES = {
    "h2": MoleculeSpec(
        "h2",
        (("H", (0.0, 0.0, -0.3707)), ("H", (0.0, 0.0, 0.3707))),
        point_group_hint="D2h",
        note="r(HH) = 0.7414 A, experimental equilibrium",
    ),
    "h4": MoleculeSpec(
        "h4",
        (
            ("H", (0.0, 0.0, -1.5)),
            ("H", (0.0, 0.0, -0.5)),
            ("H", (0.0, 0.0, 0.5)),
            ("H", (0.0, 0.0, 1.5)),
        ),
        point_group_hint="D2h",
        note="linear chain, uniform 1.0 A spacing; common benchmark",
    ),
    "h4_stretched": MoleculeSpec(
        "h4_stretched",
        (
            ("H", (0.0, 0.0, -2.7)),
            ("H", (0.0, 0.0, -0.9)),
            ("H", (0.0, 0.0, 0.9)),
            ("H", (0.0, 0.0, 2.7)),
        ),
        point_group_hint="D2h",
        note="linear chain, uniform 1.8 A spacing; static-correlation probe",
    ),
    "lih": MoleculeSpec(
        "lih",
        (("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.5949))),
        point_group_hint="C2v",
        note="r(LiH) = 1.5949 A, experimental equilibrium",
    ),
    "h2o": MoleculeSpec(
        "h2o",
        (
            ("O", (0.0, 0.0, 0.1173)),
            ("H", (0.0, 0.7572, -0.4692)),
            ("H", (0.0, -0.7572, -0.4692)),
        ),
        point_group_hint="C2v",
        note="r(OH) = 0.9575 A, angle 104.51 deg, experimental equilibrium",
    ),
    "h2o_631g": MoleculeSpec(
        "h2o",
        (
            ("O", (0.0, 0.0, 0.1173)),
            ("H", (0.0, 0.7572, -0.4692)),
            ("H", (0.0, -0.7572, -0.4692)),
        ),
        basis="6-31g",
        point_group_hint="C2v",
        note="same geometry as the sto-3g fixture, split-valence basis",
    ),
    "c2h2": MoleculeSpec(
        "c2h2",
        (
            ("C", (0.0, 0.0, -0.6015)),
            ("C", (0.0, 0.0, 0.6015)),
            ("H", (0.0, 0.0, -1.6615)),
            ("H", (0.0, 0.0, 1.6615)),
        ),
        point_group_hint="D2h",
        note="r(CC) = 1.203 A, r(CH) = 1.060 A, experimental equilibrium",
    ),
}
