"""Generate FCIDUMP fixtures with HF/CISD/FCI reference energies.

Usage: generate.py --molecule h2o --basis sto-3g --out fixtures/
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .ci import cisd_energy, fci_energy
from .fcidump import write_fcidump
from .molecules import MOLECULES, MoleculeSpec
from .scf import run_rhf, transform_to_mo
from .symmetry import assign_irreps


def generate(spec: MoleculeSpec, out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    res = run_rhf(spec)
    energies, c, orbsym, group = assign_irreps(res)
    h1, eri = transform_to_mo(res, c)
    n_elec = sum(res.charges) - spec.charge
    core = res.nuclear_energy

    stem = f"{spec.name}_{spec.basis.replace('-', '')}"
    write_fcidump(out_dir / f"{stem}.fcidump", h1, eri, core, n_elec, orbsym)

    refs = {
        "molecule": spec.name,
        "basis": spec.basis,
        "point_group": group,
        "n_spatial": int(h1.shape[0]),
        "n_electrons": int(n_elec),
        "ms2": 0,
        "hf_energy": res.energy,
        "cisd_energy": cisd_energy(h1, eri, core, n_elec),
        "fci_energy": fci_energy(h1, eri, core, n_elec),
        "orbsym": orbsym,
    }
    with open(out_dir / f"{stem}.ref.json", "w") as fh:
        json.dump(refs, fh, indent=2)
        fh.write("\n")

    with open(out_dir / f"{stem}.provenance.txt", "w") as fh:
        fh.write(f"generator: fixturegen {__version__} (built-in RHF/CI backend)\n")
        fh.write(f"molecule: {spec.name}  basis: {spec.basis}  group: {group}\n")
        fh.write(f"note: {spec.note}\n")
        fh.write("geometry (Angstrom):\n")
        for el, xyz in spec.geometry:
            fh.write(f"  {el:2s} {xyz[0]: .6f} {xyz[1]: .6f} {xyz[2]: .6f}\n")
        if refs["fci_energy"] is None:
            fh.write("fci: skipped (determinant space beyond the desk guard)\n")
    return refs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--molecule", required=True, choices=sorted(MOLECULES))
    parser.add_argument("--basis", default="sto-3g")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    spec = MOLECULES[args.molecule]
    if args.basis.lower() != spec.basis:
        print(f"only {spec.basis} is available for {spec.name}", file=sys.stderr)
        return 1
    refs = generate(spec, args.out)
    fci = refs["fci_energy"]
    print(f"{spec.name}: HF {refs['hf_energy']:.8f}  CISD {refs['cisd_energy']:.8f}  "
          f"FCI {fci if fci is None else format(fci, '.8f')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
