"""Basis-set data (EMSL exchange values) for the supported elements."""

from __future__ import annotations

from .gaussians import Shell

# universal STO-3G contraction coefficients
_S1 = (0.1543289673, 0.5353281423, 0.4446345422)
_S2 = (-0.09996722919, 0.3995128261, 0.7001154689)
_P2 = (0.1559162750, 0.6076837186, 0.3919573931)

STO3G = {
    "H": [
        ("S", (3.425250914, 0.6239137298, 0.1688554040), _S1),
    ],
    "Li": [
        ("S", (16.11957475, 2.936200663, 0.7946504870), _S1),
        ("SP", (0.6362897469, 0.1478600533, 0.0480886784), (_S2, _P2)),
    ],
    "C": [
        ("S", (71.61683735, 13.04509632, 3.530512160), _S1),
        ("SP", (2.941249355, 0.6834830964, 0.2222899159), (_S2, _P2)),
    ],
    "O": [
        ("S", (130.7093214, 23.80886605, 6.443608313), _S1),
        ("SP", (5.033151319, 1.169596125, 0.3803889600), (_S2, _P2)),
    ],
}

G631 = {
    "H": [
        ("S", (18.73113696, 2.825394365, 0.6401216923),
         (0.03349460434, 0.2347269535, 0.8137573261)),
        ("S", (0.1612777588,), (1.0,)),
    ],
    "O": [
        ("S", (5484.671660, 825.2349460, 188.0469580, 52.96450000, 16.89757040, 5.799635340),
         (0.001831074430, 0.01395017220, 0.06844507810, 0.2327143360, 0.4701928980, 0.3585208530)),
        ("SP", (15.53961625, 3.599933586, 1.013761750),
         ((-0.1107775495, -0.1480262627, 1.130767015),
          (0.07087426823, 0.3397528391, 0.7271585773))),
        ("SP", (0.2700058226,), ((1.0,), (1.0,))),
    ],
}

BASES = {"sto-3g": STO3G, "6-31g": G631}

CHARGES = {"H": 1, "Li": 3, "C": 6, "O": 8}


def shells_for(element: str, center: tuple[float, float, float],
               basis: str = "sto-3g") -> list[Shell]:
    try:
        table = BASES[basis.lower()]
    except KeyError:
        raise ValueError(f"unsupported basis {basis!r}; have {sorted(BASES)}") from None
    try:
        spec = table[element]
    except KeyError:
        raise ValueError(f"no {basis} data for element {element!r}") from None
    shells = []
    for kind, exps, coefs in spec:
        if kind == "S":
            shells.append(Shell(center, 0, exps, coefs))
        elif kind == "SP":
            s_coefs, p_coefs = coefs
            shells.append(Shell(center, 0, exps, s_coefs))
            shells.append(Shell(center, 1, exps, p_coefs))
        else:
            raise ValueError(f"unknown shell kind {kind!r}")
    return shells
