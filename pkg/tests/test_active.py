import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uccvqe.active import (
    DegenerateGapError,
    DensityMatrix1P,
    NoonSpectrum,
    SelectionError,
    mp2_energy_and_density,
    noon_spectrum,
    read_density,
    rotate_integrals,
    select_active,
    write_density,
)
from uccvqe.exact import ground_energy, sector_spectrum
from uccvqe.integrals import SpatialIntegrals, full_space, reference_energy
from uccvqe.synthetic import banded_noon, density_with_spectrum, random_integrals


def spin_orbital_mp2(ints):
    """MP2 energy and spin-summed unrelaxed density from antisymmetrised spin orbitals."""
    n = ints.n_orb
    nso = 2 * n
    spat, spin = np.arange(nso) // 2, np.arange(nso) % 2
    same = (spin[:, None] == spin[None, :]).astype(float)
    # <pq|rs> = (pr|qs) delta(sp, sr) delta(sq, ss)
    g = ints.eri[np.ix_(spat, spat, spat, spat)].transpose(0, 2, 1, 3)
    g = g * same[:, None, :, None] * same[None, :, None, :]
    anti = g - g.transpose(0, 1, 3, 2)
    nocc = ints.n_elec
    occ_so = [p for p in range(nso) if spat[p] < nocc // 2]
    vir_so = [p for p in range(nso) if spat[p] >= nocc // 2]
    eps = ints.orb_energies[spat]
    o, v = np.array(occ_so), np.array(vir_so)
    oovv = anti[np.ix_(o, o, v, v)]
    den = eps[o][:, None, None, None] + eps[o][None, :, None, None]
    den = den - eps[v][None, None, :, None] - eps[v][None, None, None, :]
    t = oovv / den
    e2 = 0.25 * np.sum(oovv * t)
    d_so = np.zeros((nso, nso))
    d_so[o, o] = 1.0
    d_so[np.ix_(o, o)] -= 0.5 * np.einsum("ikab,jkab->ij", t, t)
    d_so[np.ix_(v, v)] += 0.5 * np.einsum("ijac,ijbc->ab", t, t)
    d = d_so[0::2, 0::2] + d_so[1::2, 1::2]
    return e2, d


def test_mp2_matches_generating_code(h2, h4, lih, refs):
    for ints, key in [(h2, "h2_sto3g"), (h4, "h4_chain_sto3g"), (lih, "lih_sto3g")]:
        e, dm = mp2_energy_and_density(ints)
        assert e == pytest.approx(refs[key]["e_mp2"], abs=1e-10)
        occ = noon_spectrum(dm).occupations
        np.testing.assert_allclose(occ, refs[key]["mp2_noon"], atol=1e-8)


@pytest.mark.parametrize("name", ["h2", "h4", "lih"])
def test_mp2_matches_spin_orbital_oracle(name, request):
    ints = request.getfixturevalue(name)
    e, dm = mp2_energy_and_density(ints)
    e2, d_oracle = spin_orbital_mp2(ints)
    assert e - reference_energy(full_space(ints)) == pytest.approx(e2, abs=1e-12)
    np.testing.assert_allclose(dm.matrix, d_oracle, atol=1e-12)


def test_h2_mp2_brackets(h2):
    e, dm = mp2_energy_and_density(h2)
    assert ground_energy(full_space(h2))[0] < e < reference_energy(full_space(h2))
    assert -1.1373 < e < -1.1167
    assert dm.n_elec == pytest.approx(2.0, abs=1e-8)


def test_h2_mp2_noon_shape(h2):
    occ = noon_spectrum(mp2_energy_and_density(h2)[1]).occupations
    x = occ[1]
    assert 0 < x < 0.1
    assert occ[0] == pytest.approx(2 - x, abs=1e-12)


def test_mp2_no_virtuals_is_hartree_fock():
    ints = SpatialIntegrals(1, 2, 0, 0.2, np.array([[-1.0]]), np.full((1, 1, 1, 1), 0.6),
                            orb_energies=np.array([-0.4]))
    e, dm = mp2_energy_and_density(ints)
    assert e == reference_energy(full_space(ints))
    np.testing.assert_array_equal(dm.matrix, [[2.0]])


def test_mp2_correlation_is_negative(lih):
    e, _ = mp2_energy_and_density(lih)
    assert e - reference_energy(full_space(lih)) < 0


def test_mp2_degenerate_gap_names_orbitals():
    ints = SpatialIntegrals(2, 2, 0, 0.0, np.diag([-1.0, -1.0]), np.zeros((2,) * 4),
                            orb_energies=np.array([-0.5, -0.5]))
    with pytest.raises(DegenerateGapError, match="occupied orbital 0 and virtual orbital 1"):
        mp2_energy_and_density(ints)


def test_mp2_requires_orbital_energies():
    with pytest.raises(ValueError):
        mp2_energy_and_density(random_integrals(3, 2))


def test_noon_trivial_diagonal():
    spectrum = noon_spectrum(DensityMatrix1P(np.diag([2.0, 2.0, 0.0])))
    np.testing.assert_array_equal(spectrum.occupations, [2, 2, 0])
    r = np.abs(spectrum.rotation)
    # degenerate occupations may come back in either order: a permutation
    np.testing.assert_array_equal(np.sort(r, axis=None), [0] * 6 + [1] * 3)
    np.testing.assert_array_equal(r.sum(axis=0), 1)
    np.testing.assert_array_equal(r.sum(axis=1), 1)
    assert r[2, 2] == 1


def test_noon_sign_convention_and_orthogonality():
    spectrum = noon_spectrum(density_with_spectrum([1.9, 1.5, 0.4, 0.2], seed=5))
    r = spectrum.rotation
    np.testing.assert_allclose(r.T @ r, np.eye(4), atol=1e-10)
    cols = np.arange(4)
    assert np.all(r[np.argmax(np.abs(r), axis=0), cols] > 0)
    assert np.all(np.diff(spectrum.occupations) <= 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2), min_size=2, max_size=7), st.integers(0, 1000))
def test_noon_invariant_under_conjugation(occ, seed):
    dm = density_with_spectrum(occ, seed)
    q, _ = np.linalg.qr(np.random.default_rng(seed + 1).normal(size=(len(occ), len(occ))))
    rotated = DensityMatrix1P(0.5 * (q @ dm.matrix @ q.T + (q @ dm.matrix @ q.T).T))
    np.testing.assert_allclose(
        noon_spectrum(rotated).occupations, noon_spectrum(dm).occupations, atol=1e-10
    )


def test_density_rejects_asymmetry():
    with pytest.raises(ValueError):
        DensityMatrix1P(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_density_physical_checks():
    DensityMatrix1P(np.diag([2.0, 0.0])).check_physical(2.0)
    with pytest.raises(ValueError):
        DensityMatrix1P(np.diag([2.5, -0.5])).check_physical()
    with pytest.raises(ValueError):
        DensityMatrix1P(np.diag([2.0, 0.5])).check_physical(2.0)


def test_density_file_round_trip(tmp_path):
    dm = density_with_spectrum([1.9, 0.1, 0.0], seed=2)
    write_density(tmp_path / "pdm.txt", dm)
    np.testing.assert_array_equal(read_density(tmp_path / "pdm.txt").matrix, dm.matrix)


def _spec(occ):
    return NoonSpectrum(np.array(occ, dtype=float), np.eye(len(occ)))


def test_select_simple_band():
    assert select_active(_spec([2.0, 1.9, 1.5, 0.5, 0.1, 0.0]), 0.05) == ([1, 2, 3, 4], 4)


def test_select_odd_count_is_rejected():
    with pytest.raises(SelectionError, match="open shells"):
        select_active(_spec([2.0, 1.97, 1.0, 0.03, 0.0]), 0.05)


def test_select_empty_raises():
    with pytest.raises(SelectionError, match="no fractional orbitals"):
        select_active(_spec([2.0, 2.0, 0.0]), 0.01)


def test_select_threshold_domain():
    with pytest.raises(ValueError):
        select_active(_spec([2.0, 1.0, 0.0]), 1.0)


def test_banded_spectrum_gives_ten_by_ten():
    spectrum = noon_spectrum(density_with_spectrum(banded_noon(), seed=0))
    active, n_elec = select_active(spectrum, 0.01)
    assert (len(active), n_elec) == (10, 10)
    fewer, _ = select_active(spectrum, 0.5)
    assert len(fewer) < len(active)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0, 2), min_size=3, max_size=10),
    st.floats(0.001, 0.99),
    st.floats(0.001, 0.99),
)
def test_select_monotone_in_threshold(occ, t1, t2):
    lo, hi = sorted((t1, t2))
    spectrum = _spec(sorted(occ, reverse=True))

    def chosen(t):
        try:
            return set(select_active(spectrum, t)[0])
        except SelectionError:
            return set()

    a, b = chosen(hi), chosen(lo)
    if a and b:
        assert len(a) <= len(b)


def test_rotate_identity_is_exact(lih):
    out = rotate_integrals(lih, np.eye(lih.n_orb))
    assert np.max(np.abs(out.eri - lih.eri)) <= 1e-15
    assert np.max(np.abs(out.h_one - lih.h_one)) <= 1e-15
    assert out.e_core == lih.e_core


def test_rotate_permutation_relabels(h4):
    perm = np.eye(4)[:, [1, 0, 2, 3]]
    out = rotate_integrals(h4, perm)
    idx = [1, 0, 2, 3]
    np.testing.assert_allclose(out.eri, h4.eri[np.ix_(idx, idx, idx, idx)], atol=1e-15)
    np.testing.assert_allclose(out.h_one, h4.h_one[np.ix_(idx, idx)], atol=1e-15)


def test_rotate_matches_einsum_oracle(lih, rng):
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    out = rotate_integrals(lih, q)
    ref = np.einsum("pqrs,pi,qj,rk,sl->ijkl", lih.eri, q, q, q, q, optimize=True)
    np.testing.assert_allclose(out.eri, ref, atol=1e-12)
    np.testing.assert_allclose(out.h_one, q.T @ lih.h_one @ q, atol=1e-13)


def test_rotate_rejects_bad_input(h2):
    with pytest.raises(ValueError):
        rotate_integrals(h2, np.eye(3))
    with pytest.raises(ValueError):
        rotate_integrals(h2, np.array([[1.0, 1.0], [0.0, 1.0]]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_rotation_preserves_spectrum(seed):
    ints = random_integrals(3, 2, seed)
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(3, 3)))
    rotated = rotate_integrals(ints, q)
    for na, nb in [(1, 1), (2, 0), (2, 1)]:
        a = sector_spectrum(full_space(ints), 9, na, nb)
        b = sector_spectrum(full_space(rotated), 9, na, nb)
        np.testing.assert_allclose(a, b, atol=1e-9)
