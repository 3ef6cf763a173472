"""Regenerate the H2 FCIDUMP fixtures and their full-CI reference energies.

Requires pyscf. Run from the repository root:

    python3 fixtures/generate_h2_fixtures.py

Writes fixtures/h2_<basis>/R<bond>.fcidump, a sweep manifest per basis and a
reference file with the N_e = 2 full-CI ground energy (Hartree, including
nuclear repulsion) for every geometry.
"""
import os

import numpy as np
from pyscf import fci, gto, scf
from pyscf.tools import fcidump

HERE = os.path.dirname(os.path.abspath(__file__))


def bond_lengths():
    grid = [round(0.3 + 0.1 * i, 4) for i in range(28)]
    return sorted(set(grid + [0.7414]))


def generate(basis):
    outdir = os.path.join(HERE, f"h2_{basis.replace('-', '').lower()}")
    os.makedirs(outdir, exist_ok=True)
    manifest = [f"# H2 {basis} sweep: bond_length(Angstrom) fcidump_path"]
    refs = [f"# H2 {basis} N_e=2 full-CI ground energy (Hartree): bond_length energy"]
    for r in bond_lengths():
        mol = gto.M(atom=f"H 0 0 0; H 0 0 {r}", basis=basis, unit="Angstrom", verbose=0)
        mf = scf.RHF(mol)
        mf.conv_tol = 1e-12
        mf.kernel()
        name = f"R{r:.4f}.fcidump"
        fcidump.from_scf(mf, os.path.join(outdir, name), tol=1e-15)
        e_fci, _ = fci.FCI(mf).kernel()
        manifest.append(f"{r:.4f} {name}")
        refs.append(f"{r:.4f} {e_fci:.12f}")
    with open(os.path.join(outdir, "sweep.txt"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")
    with open(os.path.join(outdir, "fci_reference.txt"), "w") as fh:
        fh.write("\n".join(refs) + "\n")


if __name__ == "__main__":
    np.set_printoptions(precision=12)
    for basis in ("STO-3G", "STO-6G"):
        generate(basis)
