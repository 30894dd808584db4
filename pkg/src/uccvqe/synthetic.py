"""Random and model inputs for tests, benchmarks and demonstrations."""

from __future__ import annotations

import numpy as np

from uccvqe.active import DensityMatrix1P
from uccvqe.integrals import SpatialIntegrals


def random_integrals(
    n_orb: int,
    n_elec: int,
    seed: int | np.random.Generator = 0,
    scale: float = 0.3,
    rank: int | None = None,
) -> SpatialIntegrals:
    """Molecule-like random integrals with a positive semidefinite ERI.

    The one-electron diagonal rises with orbital index so the lowest
    orbitals make a sensible closed-shell reference; the two-electron tensor
    is a sum of squares ``sum_k L_k (x) L_k`` of symmetric matrices, which
    gives the full eightfold symmetry.
    """
    rng = np.random.default_rng(seed)
    rank = rank or max(2, n_orb)
    h = scale * rng.normal(size=(n_orb, n_orb))
    h = 0.5 * (h + h.T) + np.diag(np.linspace(-2.0, 0.5, n_orb))
    chol = scale * rng.normal(size=(rank, n_orb, n_orb))
    chol = 0.5 * (chol + chol.transpose(0, 2, 1))
    chol[:, np.arange(n_orb), np.arange(n_orb)] += 0.5
    eri = np.einsum("kpq,krs->pqrs", chol, chol)
    eri = 0.5 * (eri + eri.transpose(2, 3, 0, 1))
    return SpatialIntegrals(
        n_orb=n_orb,
        n_elec=n_elec,
        ms2=n_elec % 2,
        e_core=float(rng.uniform(0.0, 1.0)),
        h_one=h,
        eri=eri,
        orbital_basis="synthetic",
    )


def banded_noon(
    n_core: int = 20, n_frac: int = 10, n_virt: int = 30, n_frac_elec: int = 10
) -> np.ndarray:
    """Descending occupations: a saturated core, a fractional band, empty virtuals.

    Shaped after a transition-metal oxide cluster: most orbitals sit at
    2 or 0 within a few 1e-3, while ``n_frac`` orbitals spread between
    about 1.95 and 0.05 and sum to ``n_frac_elec``.
    """
    core = 2.0 - np.linspace(0.0005, 0.004, n_core)
    virt = np.linspace(0.004, 0.0002, n_virt)
    if n_virt:
        virt *= (2.0 * n_core - core.sum()) / virt.sum()  # keep the trace integral
    band = np.linspace(1.96, 0.04, n_frac)
    band += (n_frac_elec - band.sum()) / n_frac
    occ = np.concatenate([core, band, virt])
    return np.sort(occ)[::-1]


def density_with_spectrum(occupations, seed: int = 0) -> DensityMatrix1P:
    """A symmetric 1-PDM with the given eigenvalues in a random orthonormal basis."""
    occ = np.asarray(occupations, dtype=float)
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(len(occ), len(occ))))
    dm = (q * occ) @ q.T
    return DensityMatrix1P(0.5 * (dm + dm.T))
