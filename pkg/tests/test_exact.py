import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uccvqe.exact import (
    BasisTooLargeError,
    ConvergenceError,
    SectorHamiltonian,
    build_basis,
    davidson,
    ground_energy,
    qubit_sector_indices,
    sector_spectrum,
    sector_to_statevector,
    slater_condon_matrix,
)
from uccvqe.integrals import SpatialIntegrals, build_active_space, full_space
from uccvqe.pauli import map_hamiltonian
from uccvqe.synthetic import random_integrals


def test_basis_sizes():
    assert len(build_basis(2, 1, 1)) == 4
    assert len(build_basis(10, 5, 5)) == 63504 == comb(10, 5) ** 2
    vac = build_basis(3, 0, 0)
    assert len(vac) == 1 and vac.determinants() == [(0, 0)]


def test_basis_enumeration_is_lexicographic_and_exact():
    basis = build_basis(4, 2, 1)
    a = basis.alpha.masks
    assert list(a) == sorted(a)
    assert all(bin(m).count("1") == 2 and m < 16 for m in a)
    assert len(basis) == comb(4, 2) * 4


def test_basis_cap_refusal():
    with pytest.raises(BasisTooLargeError):
        build_basis(10, 5, 5, cap=60000)
    with pytest.raises(ValueError):
        build_basis(3, 4, 0)


def test_one_orbital_two_electrons():
    ints = SpatialIntegrals(1, 2, 0, 0.25, np.array([[-1.1]]), np.full((1, 1, 1, 1), 0.7))
    e, _ = ground_energy(full_space(ints))
    assert e == pytest.approx(2 * -1.1 + 0.7 + 0.25, abs=1e-14)


def test_non_interacting_limit():
    eps = np.array([-0.9, 0.4])
    ints = SpatialIntegrals(2, 2, 0, 0.0, np.diag(eps), np.zeros((2,) * 4))
    spectrum = sector_spectrum(full_space(ints), 4)
    expected = sorted(eps[i] + eps[j] for i in range(2) for j in range(2))
    np.testing.assert_allclose(spectrum, expected, atol=1e-14)


def test_fixture_energies_match_generating_code(h2, h4, lih, refs):
    for ints, key in [(h2, "h2_sto3g"), (h4, "h4_chain_sto3g"), (lih, "lih_sto3g")]:
        for method in ("dense", "krylov"):
            e, _ = ground_energy(full_space(ints), method=method)
            assert e == pytest.approx(refs[key]["e_fci"], abs=1e-9)


def test_h2_window(h2):
    assert abs(ground_energy(full_space(h2))[0] - (-1.1373)) < 2e-4


def test_n_lowest_one_matches_ground(h4):
    prob = full_space(h4)
    assert sector_spectrum(prob, 1)[0] == ground_energy(prob)[0]


def test_matvec_matches_slater_condon(rng):
    for m, na, nb in [(3, 2, 1), (4, 2, 2), (5, 3, 2)]:
        prob = full_space(random_integrals(m, na + nb, int(rng.integers(1 << 30))))
        basis = build_basis(m, na, nb)
        np.testing.assert_allclose(
            SectorHamiltonian(prob, basis).to_dense(), slater_condon_matrix(prob, basis), atol=1e-12
        )


def test_diagonal_matches_dense(lih):
    prob = full_space(lih)
    basis = build_basis(6, 2, 2)
    op = SectorHamiltonian(prob, basis)
    np.testing.assert_allclose(op.diagonal().reshape(-1), np.diag(op.to_dense()), atol=1e-12)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_krylov_agrees_with_dense(seed):
    prob = full_space(random_integrals(5, 4, seed))
    dense = sector_spectrum(prob, 3, method="dense")
    krylov = sector_spectrum(prob, 3, method="krylov")
    np.testing.assert_allclose(krylov, dense, atol=1e-9)


def test_davidson_on_explicit_matrix(rng):
    a = rng.normal(size=(300, 300))
    a = 0.5 * (a + a.T) + np.diag(np.arange(300.0))
    w, v = davidson(lambda x: a @ x, np.diag(a).copy(), n_roots=2)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[:2], atol=1e-9)
    np.testing.assert_allclose(np.linalg.norm(a @ v[0] - w[0] * v[0]), 0, atol=1e-8)


def test_davidson_reports_residual_on_failure(rng):
    a = rng.normal(size=(200, 200))
    a = 0.5 * (a + a.T)
    with pytest.raises(ConvergenceError) as info:
        davidson(lambda x: a @ x, np.diag(a).copy(), tol=1e-14, max_iter=2)
    assert info.value.residual > 0


def _qubit_sector(mat, m, na, nb):
    idx = qubit_sector_indices(m, na, nb)
    return mat[np.ix_(idx, idx)]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_dual_representation_all_sectors(m, rng):
    prob = full_space(random_integrals(m, 1, int(rng.integers(1 << 30))))
    mat = map_hamiltonian(prob).to_matrix().real
    for na, nb in itertools.product(range(m + 1), repeat=2):
        qubit = np.linalg.eigvalsh(_qubit_sector(mat, m, na, nb))
        sc = np.linalg.eigvalsh(slater_condon_matrix(prob, build_basis(m, na, nb)))
        np.testing.assert_allclose(qubit, sc, atol=1e-9)


def test_sector_vector_maps_to_qubit_eigenvector(h4):
    prob = full_space(h4)
    e, vec = ground_energy(prob)
    psi = sector_to_statevector(vec, build_basis(4, 2, 2))
    hpsi = map_hamiltonian(prob).to_matrix() @ psi
    np.testing.assert_allclose(hpsi, e * psi, atol=1e-9)


def test_active_space_casci_below_reference(lih):
    from uccvqe.integrals import reference_energy

    prob = build_active_space(lih, [1, 2, 3, 4], 2)
    assert ground_energy(prob)[0] <= reference_energy(prob) + 1e-12
