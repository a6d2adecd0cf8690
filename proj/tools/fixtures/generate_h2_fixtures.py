#!/usr/bin/env python3
"""Generate the H2 FCIDUMP fixtures and their full-CI reference energies.

Requires PySCF. Run from the repository root:

    python3 tools/fixtures/generate_h2_fixtures.py tests/fixtures

Writes one FCIDUMP per (basis, bond length), a sweep manifest per basis and
references.csv holding the lowest two-electron FCI energy for every file.
"""
import os
import sys

from pyscf import fci, gto, scf
from pyscf.tools import fcidump

SWEEP = [0.3, 0.5, 0.7, 0.7414, 0.9, 1.1, 1.3, 1.5, 1.8, 2.1, 2.5, 3.0]
BASES = ["sto-3g", "sto-6g"]


def build(basis, r):
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis=basis, unit="Angstrom",
                verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    return mol, mf


def main(outdir):
    os.makedirs(outdir, exist_ok=True)
    refs = ["basis,bond_length,file,fci_energy"]
    for basis in BASES:
        tag = basis.replace("-", "")
        manifest = [f"# H2 {basis.upper()} sweep: bond_length(Angstrom) fcidump"]
        for r in SWEEP:
            mol, mf = build(basis, r)
            name = f"h2_{tag}_{r:.4f}.fcidump"
            fcidump.from_scf(mf, os.path.join(outdir, name), tol=1e-15)
            e, _ = fci.FCI(mf).kernel()
            refs.append(f"{basis},{r:.4f},{name},{e:.12f}")
            manifest.append(f"{r:.4f} {name}")
        with open(os.path.join(outdir, f"h2_{tag}_sweep.txt"), "w") as f:
            f.write("\n".join(manifest) + "\n")
    with open(os.path.join(outdir, "references.csv"), "w") as f:
        f.write("\n".join(refs) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
