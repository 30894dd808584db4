import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from uccvqe.ansatz import build_ansatz, build_kupccgsd, map_generators
from uccvqe.circuit import (
    Gate,
    GateCircuit,
    apply,
    apply_generators_directly,
    apply_pauli_sum,
    basis_state,
    depth,
    dump_circuit,
    expectation,
    fidelity,
    gate_matrix,
    pauli_rotation_gates,
    resources,
    synthesize,
)
from uccvqe.integrals import full_space, reference_energy
from uccvqe.pauli import PauliString, PauliSum, map_hamiltonian

from oracles import dense_generator, kron_oracle

FAMILIES = [("uccsd", 1), ("uccgsd", 1), ("kupccgsd", 1), ("kupccgsd", 3)]


def word(s):
    return PauliString.from_label(len(s), list(enumerate(s)))


def circuit_unitary(circ, theta=()):
    n = circ.n_qubits
    cols = []
    for i in range(1 << n):
        e = np.zeros(1 << n, dtype=complex)
        e[i] = 1
        cols.append(apply(circ, theta, e))
    return np.array(cols).T


def test_zz_rotation_shape():
    gates = pauli_rotation_gates(word("ZZ"), 0, 1.0)
    circ = GateCircuit(2, tuple(gates), 1)
    r = resources(circ)
    assert (r.cnot_gates, sum(g.name == "RZ" for g in gates), r.circuit_depth) == (2, 1, 3)


def test_x_rotation_shape():
    gates = pauli_rotation_gates(word("X"), 0, 1.0)
    assert [g.name for g in gates] == ["H", "RZ", "H"]


@pytest.mark.parametrize("label", ["X", "Y", "Z", "XY", "ZYX", "YIZX", "IYIY"])
def test_rotation_gates_realise_exponential(label):
    a = 0.731
    circ = GateCircuit(len(label), tuple(pauli_rotation_gates(word(label), None, 0.0, angle=a)))
    target = expm(-0.5j * a * kron_oracle(label))
    np.testing.assert_allclose(circuit_unitary(circ), target, atol=1e-13)


def test_gate_matrices():
    np.testing.assert_allclose(gate_matrix("RZ", 0.4), np.diag([np.exp(-0.2j), np.exp(0.2j)]))
    np.testing.assert_allclose(gate_matrix("RX", 0.4), expm(-0.2j * kron_oracle("X")), atol=1e-15)
    psi = apply(GateCircuit(1, (Gate("RZ", (0,), angle=0.9),)), (), basis_state(1, [0]))
    assert psi[0] == pytest.approx(np.exp(-0.45j))


def test_cnot_little_endian():
    circ = GateCircuit(2, (Gate("CNOT", (0, 1)),))
    psi = apply(circ, (), basis_state(2, [1, 0]))  # qubit 0 set: index 1
    assert abs(psi[3]) == 1.0


def test_depth_examples():
    cn = lambda a, b: Gate("CNOT", (a, b))  # noqa: E731
    assert depth(GateCircuit(4, (cn(0, 1), cn(2, 3), cn(1, 2)))) == 2
    assert depth(GateCircuit(3, ())) == 0
    assert depth(GateCircuit(1, tuple(Gate("H", (0,)) for _ in range(7)))) == 7


def test_depth_of_disjoint_concatenation_is_max():
    a = GateCircuit(4, tuple(Gate("H", (0,)) for _ in range(5)))
    b = GateCircuit(4, tuple(Gate("H", (3,)) for _ in range(3)))
    assert depth(a + b) == 5
    assert depth(a + a) == 10


def test_circuit_validation():
    with pytest.raises(ValueError):
        GateCircuit(2, (Gate("CNOT", (1, 1)),))
    with pytest.raises(ValueError):
        GateCircuit(2, (Gate("H", (2,)),))
    with pytest.raises(ValueError):
        GateCircuit(2, (Gate("RZ", (0,), slot=1, scale=1.0),), n_params=1)
    with pytest.raises(ValueError):
        GateCircuit(1, (Gate("T", (0,)),))


def test_apply_rejects_bad_shapes():
    circ = synthesize(build_ansatz("uccsd", 2, 2))
    with pytest.raises(ValueError):
        apply(circ, np.zeros(2), basis_state(4, [1, 1, 0, 0]))
    with pytest.raises(ValueError):
        apply(circ, np.zeros(3), np.zeros(8, dtype=complex))


def test_x_prefix_prepares_reference():
    prog = build_ansatz("uccsd", 3, 4)
    circ = synthesize(prog)
    prefix = GateCircuit(6, tuple(g for g in circ.gates if g.name == "X"))
    assert len(prefix.gates) == 4
    psi = apply(prefix, (), basis_state(6, [0] * 6))
    np.testing.assert_array_equal(psi, basis_state(6, prog.reference_occupation))


@pytest.mark.parametrize("family,k", FAMILIES)
def test_cnot_accounting(family, k):
    prog = map_generators(build_ansatz(family, 3, 2, k))
    expected = sum(2 * (p.weight - 1) for g in prog.generators for p, _ in g.items())
    r = resources(synthesize(prog))
    assert r.cnot_gates == expected
    assert r.cnot_gates <= r.total_gates and r.circuit_depth <= r.total_gates
    assert r.parameter_count == prog.n_params


def test_kupccgsd_linear_in_k():
    counts = {k: resources(synthesize(build_kupccgsd(10, k, 10))) for k in (1, 3, 5)}
    g1, c1 = counts[1].total_gates - 10, counts[1].cnot_gates
    for k in (3, 5):
        assert counts[k].total_gates == k * g1 + 10
        assert counts[k].cnot_gates == k * c1
    assert counts[5].cnot_gates * 3 == counts[3].cnot_gates * 5


def test_dump_circuit_format():
    circ = synthesize(build_ansatz("uccsd", 2, 2))
    lines = dump_circuit(circ).splitlines()
    assert lines[0] == "X 0"
    assert any(line.startswith("CNOT ") and "," in line for line in lines)
    rz = [line for line in lines if line.startswith("RZ")]
    slot, scale = rz[0].split(", ")[1:]
    assert int(slot) in range(3) and abs(float(scale)) > 0
    assert any(line.startswith("RX ") for line in lines)


@pytest.mark.parametrize("family,k", FAMILIES)
def test_direct_path_matches_matrix_exponential(family, k, rng):
    prog = map_generators(build_ansatz(family, 2, 2, k))
    theta = rng.uniform(-1, 1, prog.n_params)
    psi = basis_state(4, prog.reference_occupation)
    expected = psi.copy()
    for t, ex in zip(theta, prog.excitations):
        expected = expm(t * dense_generator(ex, 4)) @ expected
    np.testing.assert_allclose(apply_generators_directly(prog, theta, psi), expected, atol=1e-13)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_circuit_and_direct_paths_agree(fam, m, seed):
    family, k = fam
    prog = map_generators(build_ansatz(family, m, 2, k))
    theta = np.random.default_rng(seed).uniform(-np.pi, np.pi, prog.n_params)
    ref = basis_state(2 * m, [0] * 2 * m)
    a = apply(synthesize(prog), theta, ref)
    b = apply_generators_directly(prog, theta, basis_state(2 * m, prog.reference_occupation))
    assert fidelity(a, b) >= 1 - 1e-12
    assert np.linalg.norm(a) == pytest.approx(1, abs=1e-10)


def test_single_generator_at_pi_agrees():
    prog = map_generators(build_ansatz("uccsd", 2, 2))
    theta = np.array([0.0, 0.0, math.pi])
    a = apply(synthesize(prog), theta, basis_state(4, [0] * 4))
    b = apply_generators_directly(prog, theta, basis_state(4, prog.reference_occupation))
    assert fidelity(a, b) == pytest.approx(1, abs=1e-12)


def test_zero_theta_leaves_reference():
    prog = map_generators(build_ansatz("uccgsd", 3, 2))
    ref = basis_state(6, prog.reference_occupation)
    out = apply(synthesize(prog), np.zeros(prog.n_params), basis_state(6, [0] * 6))
    assert fidelity(out, ref) == pytest.approx(1, abs=1e-12)
    np.testing.assert_array_equal(apply_generators_directly(prog, np.zeros(prog.n_params), ref), ref)


def test_sector_preserved(rng):
    prog = map_generators(build_ansatz("uccgsd", 3, 2))
    psi = apply_generators_directly(
        prog, rng.uniform(-1, 1, prog.n_params), basis_state(6, prog.reference_occupation)
    )
    idx = np.arange(64)
    alpha = np.array([bin(i & 0b010101).count("1") for i in idx])
    beta = np.array([bin(i & 0b101010).count("1") for i in idx])
    outside = (alpha != 1) | (beta != 1)
    assert np.linalg.norm(psi[outside]) < 1e-10


def test_expectation_basics():
    psi = basis_state(2, [1, 0])
    assert expectation(PauliSum.identity(2, 0.3), psi) == pytest.approx(0.3)
    z0 = PauliSum.from_strings([(1.0, word("ZI"))])
    assert expectation(z0, basis_state(2, [0, 0])) == 1.0
    assert expectation(z0, psi) == -1.0
    with pytest.raises(ValueError):
        expectation(PauliSum.from_strings([(1j, word("ZI"))]), psi)


def test_expectation_on_reference_is_reference_energy(h2, lih):
    for ints in (h2, lih):
        prob = full_space(ints)
        op = map_hamiltonian(prob)
        psi = basis_state(prob.n_qubits, prob.reference_occupation)
        assert expectation(op, psi) == pytest.approx(reference_energy(prob), abs=1e-10)


def test_apply_pauli_sum_matches_dense(h2, rng):
    op = map_hamiltonian(full_space(h2))
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    np.testing.assert_allclose(apply_pauli_sum(op, psi), op.to_matrix() @ psi, atol=1e-13)
