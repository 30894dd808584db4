"""Gate-level synthesis of generator programs and statevector simulation.

Statevectors are flat complex arrays of length 2**n with qubit 0 as the
least significant bit of the basis index. ``RZ(a) = diag(e^{-ia/2}, e^{ia/2})``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from uccvqe.ansatz import AnsatzProgram, map_generators
from uccvqe.pauli import PauliString, PauliSum

GATE_NAMES = ("X", "H", "RX", "RZ", "CNOT")
_SQRT_HALF = 1.0 / math.sqrt(2.0)
_I_POW = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    angle: float = 0.0  # fixed angle for RX/RZ
    slot: int | None = None  # RZ angle = scale * theta[slot] when set
    scale: float = 0.0

    def resolved_angle(self, theta) -> float:
        if self.slot is None:
            return self.angle
        return self.scale * float(theta[self.slot])


@dataclass(frozen=True)
class GateCircuit:
    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int = 0

    def __post_init__(self):
        for g in self.gates:
            if g.name not in GATE_NAMES:
                raise ValueError(f"unknown gate {g.name}")
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"{g} acts outside {self.n_qubits} qubits")
            if g.name == "CNOT" and g.qubits[0] == g.qubits[1]:
                raise ValueError("CNOT control equals target")
            if g.slot is not None and not 0 <= g.slot < self.n_params:
                raise ValueError(f"parameter slot {g.slot} out of range")

    def __add__(self, other: GateCircuit) -> GateCircuit:
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return GateCircuit(
            self.n_qubits, self.gates + other.gates, max(self.n_params, other.n_params)
        )


@dataclass(frozen=True)
class ResourceReport:
    circuit_depth: int
    total_gates: int
    cnot_gates: int
    parameter_count: int

    def as_dict(self) -> dict:
        return asdict(self)


# --- synthesis ---------------------------------------------------------------

def pauli_rotation_gates(p: PauliString, slot: int | None, scale: float, angle: float = 0.0):
    """Gates for exp(-i a/2 P) with a = scale * theta[slot] (or ``angle``).

    Basis change (H for X, RX(pi/2) for Y), CNOT ladder onto the highest
    qubit of the support, RZ there, then everything undone in reverse.
    """
    support = p.support
    if not support:
        return []
    pre = []
    for q in support:
        letter = p.letter(q)
        if letter == "X":
            pre.append(Gate("H", (q,)))
        elif letter == "Y":
            pre.append(Gate("RX", (q,), angle=math.pi / 2))
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    rz = Gate("RZ", (support[-1],), angle=angle, slot=slot, scale=scale)
    post = [
        Gate("RX", g.qubits, angle=-math.pi / 2) if g.name == "RX" else g for g in reversed(pre)
    ]
    return pre + ladder + [rz] + ladder[::-1] + post


def synthesize(program: AnsatzProgram) -> GateCircuit:
    """Reference-state X prefix followed by one Trotter step of Pauli rotations.

    A generator term ``i c P`` contributes exp(i c theta P) = RZ-rotation with
    angle ``-2 c theta`` inside its basis-change/CNOT frame.
    """
    if program.generators is None:
        program = map_generators(program)
    n = program.n_qubits
    gates = [Gate("X", (q,)) for q, occ in enumerate(program.reference_occupation) if occ]
    for ex, gen in zip(program.excitations, program.generators):
        terms = gen.items()
        strings = [p for p, _ in terms]
        for i, a in enumerate(strings):
            for b in strings[i + 1:]:
                if not a.commutes_with(b):
                    raise ValueError(f"generator in slot {ex.slot} has non-commuting strings")
        for p, c in terms:
            if abs(c.real) > 1e-12:
                raise ValueError(f"generator in slot {ex.slot} is not anti-Hermitian")
            gates.extend(pauli_rotation_gates(p, ex.slot, -2.0 * c.imag))
    return GateCircuit(n, tuple(gates), program.n_params)


def depth(circuit: GateCircuit) -> int:
    """ASAP layering: each gate sits one layer after the latest gate on its qubits."""
    layer = [0] * circuit.n_qubits
    d = 0
    for g in circuit.gates:
        t = 1 + max(layer[q] for q in g.qubits)
        for q in g.qubits:
            layer[q] = t
        d = max(d, t)
    return d


def resources(circuit: GateCircuit) -> ResourceReport:
    return ResourceReport(
        circuit_depth=depth(circuit),
        total_gates=len(circuit.gates),
        cnot_gates=sum(g.name == "CNOT" for g in circuit.gates),
        parameter_count=circuit.n_params,
    )


def dump_circuit(circuit: GateCircuit) -> str:
    """``GATE q[,q2][, slot, scale]``; fixed-angle rotations print the angle."""
    out = []
    for g in circuit.gates:
        qs = ",".join(map(str, g.qubits))
        if g.slot is not None:
            out.append(f"{g.name} {qs}, {g.slot}, {g.scale!r}")
        elif g.name in ("RX", "RZ"):
            out.append(f"{g.name} {qs}, {g.angle!r}")
        else:
            out.append(f"{g.name} {qs}")
    return "\n".join(out) + ("\n" if out else "")


# --- statevectors ------------------------------------------------------------

def basis_state(n_qubits: int, occupation) -> np.ndarray:
    idx = sum(1 << q for q, o in enumerate(occupation) if o)
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[idx] = 1.0
    return psi


def _single_qubit(psi: np.ndarray, n: int, q: int, u: np.ndarray):
    v = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
    v[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    v[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def _cnot(psi: np.ndarray, n: int, c: int, t: int):
    v = psi.reshape([2] * n)
    sel0 = [slice(None)] * n
    sel1 = [slice(None)] * n
    sel0[n - 1 - c] = sel1[n - 1 - c] = 1
    sel0[n - 1 - t], sel1[n - 1 - t] = 0, 1
    sel0, sel1 = tuple(sel0), tuple(sel1)
    tmp = v[sel0].copy()
    v[sel0] = v[sel1]
    v[sel1] = tmp


def gate_matrix(name: str, angle: float = 0.0) -> np.ndarray:
    if name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if name == "H":
        return _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)
    if name == "RX":
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "RZ":
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    raise ValueError(name)


def apply(circuit: GateCircuit, theta, psi_in: np.ndarray) -> np.ndarray:
    """Run the circuit on a copy of ``psi_in``."""
    n = circuit.n_qubits
    theta = np.asarray(theta, dtype=float)
    if len(theta) != circuit.n_params:
        raise ValueError(f"expected {circuit.n_params} parameters, got {len(theta)}")
    if psi_in.shape != (1 << n,):
        raise ValueError("statevector dimension does not match the circuit")
    psi = np.array(psi_in, dtype=complex, copy=True)
    for g in circuit.gates:
        if g.name == "CNOT":
            _cnot(psi, n, *g.qubits)
        else:
            _single_qubit(psi, n, g.qubits[0], gate_matrix(g.name, g.resolved_angle(theta)))
    return psi


@lru_cache(maxsize=8)
def _indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _z_sign(n: int, z: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(_indices(n) & z) & 1)


def apply_pauli_string(x: int, z: int, psi: np.ndarray, n: int) -> np.ndarray:
    """P|psi> for P = i^{|x&z|} X^x Z^z."""
    out = np.empty_like(psi)
    phase = _I_POW[bin(x & z).count("1") % 4]
    out[_indices(n) ^ x] = phase * _z_sign(n, z) * psi
    return out


def apply_pauli_sum(op: PauliSum, psi: np.ndarray) -> np.ndarray:
    """op|psi>, with terms sharing an X mask combined into one diagonal."""
    n = op.n_qubits
    groups: dict[int, list] = {}
    for (x, z), c in op.raw_terms().items():
        groups.setdefault(x, []).append((z, c))
    idx = _indices(n)
    out = np.zeros_like(psi, dtype=complex)
    for x, terms in sorted(groups.items()):
        diag = np.zeros(1 << n, dtype=complex)
        for z, c in sorted(terms, key=lambda t: t[0]):
            diag += (c * _I_POW[bin(x & z).count("1") % 4]) * _z_sign(n, z)
        out[idx ^ x] += diag * psi
    return out


def apply_generators_directly(program: AnsatzProgram, theta, psi_in: np.ndarray) -> np.ndarray:
    """exp(theta_j G_j) applied as products of commuting Pauli rotations, no gates."""
    if program.generators is None:
        program = map_generators(program)
    theta = np.asarray(theta, dtype=float)
    if len(theta) != program.n_params:
        raise ValueError(f"expected {program.n_params} parameters, got {len(theta)}")
    n = program.n_qubits
    if psi_in.shape != (1 << n,):
        raise ValueError("statevector dimension does not match the program")
    psi = np.array(psi_in, dtype=complex, copy=True)
    for t, gen in zip(theta, program.generators):
        if t == 0.0:
            continue
        for p, c in gen.items():
            phi = c.imag * t  # exp(i phi P) = cos(phi) + i sin(phi) P
            psi = math.cos(phi) * psi + 1j * math.sin(phi) * apply_pauli_string(p.x, p.z, psi, n)
    return psi


def expectation(op: PauliSum, psi: np.ndarray) -> float:
    """<psi|op|psi> for Hermitian ``op`` and normalised ``psi``."""
    if not op.is_hermitian(1e-10):
        raise ValueError("operator is not Hermitian")
    val = np.vdot(psi, apply_pauli_sum(op, psi))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)))
