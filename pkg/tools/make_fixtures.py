"""Regenerate the bundled FCIDUMP fixtures (dev-only; needs pyscf).

    python tools/make_fixtures.py
"""

from pathlib import Path

import numpy as np
from pyscf import gto, scf, tools

OUT = Path(__file__).resolve().parents[1] / "src" / "spvqe" / "fixtures"


def h2(r):
    return gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis="sto-6g", unit="Angstrom")


def h3p(r):
    h = r * np.sqrt(3) / 2
    return gto.M(
        atom=f"H 0 0 0; H {r} 0 0; H {r / 2} {h} 0",
        basis="sto-6g",
        unit="Angstrom",
        charge=1,
    )


def dump(mol, name):
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    tools.fcidump.from_scf(mf, str(OUT / name), tol=1e-14)
    print(name, mf.e_tot)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for r in (0.5, 0.735, 1.5, 2.5):
        dump(h2(r), f"h2_{r:.3f}.fcidump")
    for r in (0.9, 2.0):
        dump(h3p(r), f"h3p_{r:.3f}.fcidump")
