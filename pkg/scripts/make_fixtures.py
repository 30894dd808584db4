"""Regenerate the FCIDUMP fixtures in tests/data with PySCF.

PySCF is only needed here; the package itself never imports it. The
reference energies written to ``reference_values.json`` come from PySCF's
own RHF/MP2/FCI/CASCI and are frozen into the test-suite.

    python scripts/make_fixtures.py
"""

import json
import pathlib

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, mp, scf
from pyscf.tools import fcidump

DATA = pathlib.Path(__file__).resolve().parents[1] / "tests" / "data"

MOLECULES = {
    "h2_sto3g": dict(atom="H 0 0 0; H 0 0 0.7414", basis="sto-3g"),
    "h4_chain_sto3g": dict(
        atom="H 0 0 0; H 0 0 0.9; H 0 0 1.8; H 0 0 2.7", basis="sto-3g"
    ),
    "lih_sto3g": dict(atom="Li 0 0 0; H 0 0 1.5949", basis="sto-3g"),
}


def dump(name, geometry):
    mol = gto.M(unit="angstrom", verbose=0, **geometry)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    c = mf.mo_coeff
    norb = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.full(mol, c), norb)
    path = DATA / f"{name}.fcidump"
    fcidump.from_integrals(
        str(path), h1, eri, norb, mol.nelectron, nuc=mol.energy_nuc(), ms=0, tol=1e-14
    )
    # Append orbital energies ahead of the trailing core-energy line.
    lines = path.read_text().splitlines()
    core = lines.pop()
    for i, e in enumerate(mf.mo_energy, start=1):
        lines.append(f"{e: .16e} {i:4d} {0:4d} {0:4d} {0:4d}")
    lines.append(core)
    path.write_text("\n".join(lines) + "\n")

    e_fci, _ = fci.direct_spin1.kernel(
        h1, eri, norb, mol.nelectron, ecore=mol.energy_nuc(), conv_tol=1e-14
    )
    pt = mp.MP2(mf)
    pt.kernel()
    noon = np.linalg.eigvalsh(pt.make_rdm1())[::-1]
    ref = {
        "norb": norb,
        "nelec": mol.nelectron,
        "e_rhf": mf.e_tot,
        "e_fci": e_fci,
        "e_mp2": pt.e_tot,
        "mp2_noon": noon.tolist(),
        "casci": {},
    }
    # CASCI on canonical RHF orbitals with the lowest ncore orbitals frozen.
    for ncas, nelecas in [(2, 2), (3, 2), (4, 4)]:
        if ncas > norb or nelecas > mol.nelectron:
            continue
        if (mol.nelectron - nelecas) // 2 + ncas > norb:
            continue
        mc = mcscf.CASCI(mf, ncas, nelecas)
        mc.fcisolver.conv_tol = 1e-14
        mc.kernel()
        ref["casci"][f"{ncas}o{nelecas}e"] = mc.e_tot
    return ref


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    refs = {name: dump(name, geometry) for name, geometry in MOLECULES.items()}
    (DATA / "reference_values.json").write_text(json.dumps(refs, indent=2) + "\n")
    print(json.dumps(refs, indent=2))
