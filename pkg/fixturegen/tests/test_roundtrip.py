"""Round-trip acceptance: regenerated fixtures agree with the consumer CLI.

The consumer is exercised strictly through its installed command-line
interface and the FCIDUMP/ref-file formats; nothing is imported from it.
"""

import json
import re
import subprocess
import sys
import time

import pytest

from fixturegen.generate import generate
from fixturegen.molecules import MOLECULES


def consumer_fci_energy(fcidump_path) -> float:
    proc = subprocess.run(
        [sys.executable, "-m", "arnnsci.cli", "fci", "--fcidump", str(fcidump_path)],
        capture_output=True,
        text=True,
        check=True,
    )
    match = re.search(r"FCI energy:\s*(-?\d+\.\d+)", proc.stdout)
    assert match, proc.stdout
    return float(match.group(1))


@pytest.mark.parametrize("molecule", ["h2", "h4"])
def test_roundtrip_fci_agreement(molecule, tmp_path):
    start = time.perf_counter()
    refs = generate(MOLECULES[molecule], tmp_path)
    stem = f"{molecule}_sto3g"
    written = json.load(open(tmp_path / f"{stem}.ref.json"))
    assert written["fci_energy"] == refs["fci_energy"]
    consumer = consumer_fci_energy(tmp_path / f"{stem}.fcidump")
    err = abs(consumer - refs["fci_energy"])
    elapsed = time.perf_counter() - start
    status = "PASS" if err < 1e-8 and elapsed < 300 else "FAIL"
    print(f"[{status}] fixturegen round trip ({molecule}): |dE| = {err:.2e} Ha "
          f"({elapsed:.1f}s, budget 300s)", flush=True)
    assert err < 1e-8
    assert elapsed < 300


def test_generate_writes_all_artifacts(tmp_path):
    generate(MOLECULES["h2"], tmp_path)
    for suffix in (".fcidump", ".ref.json", ".provenance.txt"):
        assert (tmp_path / f"h2_sto3g{suffix}").exists()
    refs = json.load(open(tmp_path / "h2_sto3g.ref.json"))
    for key in ("hf_energy", "cisd_energy", "fci_energy", "orbsym", "point_group"):
        assert key in refs


def test_cli_entry(tmp_path, capsys):
    from fixturegen.generate import main

    code = main(["--molecule", "h2", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "h2_sto3g.fcidump").exists()
