"""Natural-orbital analysis and active-space selection."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from uccvqe.integrals import SpatialIntegrals

DEFAULT_THRESHOLD = 0.01
GAP_TOL = 1e-8


class SelectionError(ValueError):
    pass


class DegenerateGapError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix1P:
    """Spin-summed one-particle density matrix in some orbital basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.allclose(m, m.T, rtol=0, atol=1e-10):
            raise ValueError("density matrix is not symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_elec(self) -> float:
        return float(np.trace(self.matrix))

    def check_physical(self, n_elec: float | None = None):
        """Raise if eigenvalues leave [0, 2] or the trace is off."""
        w = np.linalg.eigvalsh(self.matrix)
        if w.min() < -1e-8 or w.max() > 2 + 1e-8:
            raise ValueError(f"occupations outside [0, 2]: {w.min():.3g}..{w.max():.3g}")
        if n_elec is not None and abs(self.n_elec - n_elec) > 1e-6:
            raise ValueError(f"trace {self.n_elec} != {n_elec}")


@dataclass(frozen=True, eq=False)
class NoonSpectrum:
    occupations: np.ndarray  # descending
    rotation: np.ndarray  # columns are natural orbitals in the input basis


def read_density(path) -> DensityMatrix1P:
    """Whitespace-separated square matrix, one row per line."""
    return DensityMatrix1P(np.loadtxt(path, ndmin=2))


def write_density(path, density: DensityMatrix1P):
    np.savetxt(path, density.matrix, fmt="%.17g")


def mp2_energy_and_density(ints: SpatialIntegrals) -> tuple[float, DensityMatrix1P]:
    """Closed-shell MP2 energy and the unrelaxed MP2 density.

    Orbitals are taken as canonical: ``orb_energies`` are the denominators
    and the first ``n_elec / 2`` orbitals are occupied. The returned energy
    is the reference-determinant energy plus the MP2 correlation energy.
    """
    from uccvqe.integrals import full_space, reference_energy

    if ints.orb_energies is None:
        raise ValueError("MP2 needs orbital energies")
    if ints.n_elec % 2:
        raise ValueError("MP2 is implemented for closed shells only")
    nocc = ints.n_elec // 2
    eps = ints.orb_energies
    e_ref = reference_energy(full_space(ints))
    occ, vir = eps[:nocc], eps[nocc:]
    dm = np.zeros((ints.n_orb, ints.n_orb))
    dm[:nocc, :nocc] = 2.0 * np.eye(nocc)
    if not len(vir) or not nocc:
        return e_ref, DensityMatrix1P(dm)
    gap = vir[:, None] - occ[None, :]
    if gap.min() < GAP_TOL:
        a, i = np.unravel_index(np.argmin(gap), gap.shape)
        raise DegenerateGapError(
            f"occupied orbital {i} and virtual orbital {nocc + a} are not separated "
            f"(gap {gap.min():.3g} hartree)"
        )

    ovov = ints.eri[:nocc, nocc:, :nocc, nocc:]  # (ia|jb)
    denom = occ[:, None, None, None] + occ[None, None, :, None]
    denom = denom - vir[None, :, None, None] - vir[None, None, None, :]
    t = ovov / denom  # t[i, a, j, b]
    t_anti = 2.0 * t - t.transpose(0, 3, 2, 1)
    e_corr = float(np.einsum("iajb,iajb->", ovov, t_anti))

    x_oo = np.einsum("kaib,kajb->ij", t, t_anti)
    x_vv = np.einsum("iajc,ibjc->ab", t, t_anti)
    dm[:nocc, :nocc] -= x_oo + x_oo.T
    dm[nocc:, nocc:] += x_vv + x_vv.T
    return e_ref + e_corr, DensityMatrix1P(dm)


def noon_spectrum(density: DensityMatrix1P) -> NoonSpectrum:
    """Eigen-decomposition sorted by descending occupation.

    Each eigenvector is signed so its largest-magnitude component is
    positive (ties broken by the lowest index).
    """
    w, v = np.linalg.eigh(density.matrix)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    pivot = np.argmax(np.abs(v) - 1e-12 * np.arange(len(w))[:, None], axis=0)
    signs = np.sign(v[pivot, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v = v * signs
    return NoonSpectrum(occupations=w, rotation=v)


def select_active(
    spectrum: NoonSpectrum, threshold: float = DEFAULT_THRESHOLD
) -> tuple[list[int], int]:
    """Orbitals whose occupation lies strictly inside (threshold, 2 - threshold).

    The electron count is the rounded occupation sum. If that sum is odd the
    remaining orbital closest to single occupation is added; an odd count
    that survives the adjustment is rejected, as is an empty selection.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    occ = np.asarray(spectrum.occupations)
    frac = (occ > threshold) & (occ < 2 - threshold)
    active = [int(i) for i in np.flatnonzero(frac)]
    if not active:
        raise SelectionError(f"no fractional orbitals at threshold {threshold}")
    n_elec = int(round(float(occ[active].sum())))
    if n_elec % 2:
        rest = [i for i in range(len(occ)) if i not in active]
        if rest:
            extra = min(rest, key=lambda i: (abs(occ[i] - 1.0), i))
            active = sorted(active + [extra])
            n_elec = int(round(float(occ[active].sum())))
        if n_elec % 2:
            raise SelectionError(
                f"selection {active} holds {n_elec} electrons; open shells are unsupported"
            )
    return active, n_elec


def rotate_integrals(
    ints: SpatialIntegrals, rotation: np.ndarray, orbital_basis: str | None = None
) -> SpatialIntegrals:
    """Transform to the orbitals given by the columns of ``rotation``.

    h' = R^T h R and a four-index transform done as four quarter steps.
    Orbital energies do not survive a general rotation and are dropped.
    """
    r = np.asarray(rotation, dtype=float)
    n = ints.n_orb
    if r.shape != (n, n):
        raise ValueError(f"rotation shape {r.shape} does not match n_orb={n}")
    if not np.allclose(r.T @ r, np.eye(n), rtol=0, atol=1e-10):
        raise ValueError("rotation is not orthogonal")
    h = r.T @ ints.h_one @ r
    g = ints.eri
    g = np.tensordot(g, r, axes=([3], [0]))  # pqr,s'
    g = np.tensordot(g, r, axes=([2], [0])).transpose(0, 1, 3, 2)
    g = np.tensordot(g, r, axes=([1], [0])).transpose(0, 3, 1, 2)
    g = np.tensordot(g, r, axes=([0], [0])).transpose(3, 0, 1, 2)
    # Remove round-off asymmetry so the result passes the symmetry checks.
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    return replace(
        ints,
        h_one=0.5 * (h + h.T),
        eri=g,
        orb_energies=None,
        orbital_basis=orbital_basis or ints.orbital_basis,
    )
