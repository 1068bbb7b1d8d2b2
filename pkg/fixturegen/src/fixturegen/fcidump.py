"""Molpro-convention FCIDUMP writer (chemists' notation, 1-based indices)."""

from __future__ import annotations

import numpy as np

WRITE_THRESHOLD = 1e-12


def write_fcidump(path, h1: np.ndarray, eri_chem: np.ndarray, core: float,
                  n_elec: int, orbsym: list[int], ms2: int = 0) -> None:
    n = h1.shape[0]
    lines = [
        f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},",
        " ORBSYM=" + ",".join(str(k) for k in orbsym) + ",",
        " ISYM=1,",
        "&END",
    ]

    def fmt(val, i, j, k, l):
        return f" {val: .16E} {i:3d} {j:3d} {k:3d} {l:3d}"

    for p in range(n):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(p + 1):
                for s in range(r + 1):
                    rs = r * (r + 1) // 2 + s
                    if rs > pq:
                        continue
                    val = eri_chem[p, q, r, s]
                    if abs(val) > WRITE_THRESHOLD:
                        lines.append(fmt(val, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            if abs(h1[p, q]) > WRITE_THRESHOLD:
                lines.append(fmt(h1[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(core, 0, 0, 0, 0))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
