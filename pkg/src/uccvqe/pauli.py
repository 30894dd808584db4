"""Pauli strings, Pauli sums and the Jordan-Wigner mapping.

A Pauli string on ``n`` qubits is stored as two bitmasks ``(x, z)``; the
operator is ``i**popcount(x & z) * X**x Z**z`` so that a qubit with both
bits set carries a plain ``Y`` and strings stay phase-free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

PRUNE_TOL = 1e-14
_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=False)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    @classmethod
    def from_label(cls, n_qubits: int, ops: Mapping[int, str] | Iterable[tuple[int, str]]):
        """``PauliString.from_label(3, {0: "X", 2: "Z"})``"""
        items = ops.items() if isinstance(ops, Mapping) else ops
        x = z = 0
        for q, letter in items:
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range")
            letter = letter.upper()
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        return cls(n_qubits, x, z)

    def letter(self, q: int) -> str:
        return _LETTERS[(self.x >> q) & 1, (self.z >> q) & 1]

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n_qubits) if m >> q & 1]

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def sort_key(self):
        return (self.weight, self.label())

    def label(self) -> str:
        return " ".join(f"{self.letter(q)}{q}" for q in self.support)

    def __str__(self):
        return self.label() or "I"

    def commutes_with(self, other: PauliString) -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def to_matrix(self) -> np.ndarray:
        """Dense matrix, qubit 0 is the least significant bit."""
        single = {
            "I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1]),
        }
        out = np.ones((1, 1), dtype=complex)
        for q in reversed(range(self.n_qubits)):
            out = np.kron(out, single[self.letter(q)])
        return out


def _mul_masks(x1, z1, x2, z2):
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3) + 2 * _popcount(z1 & x2)
    return _PHASES[k % 4], x3, z3


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, c)`` with ``a @ b == phase * c``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit counts differ")
    phase, x, z = _mul_masks(a.x, a.z, b.x, b.z)
    return phase, PauliString(a.n_qubits, x, z)


class PauliSum:
    """Complex linear combination of Pauli strings over a fixed qubit count.

    Terms are kept in a dict keyed by ``(x, z)`` masks; coefficients smaller
    than 1e-14 in modulus are dropped on construction.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n_qubits = n_qubits
        self._terms = {
            k: complex(v) for k, v in (terms or {}).items() if abs(v) >= PRUNE_TOL
        }

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_strings(cls, pairs: Iterable[tuple[complex, PauliString]]) -> PauliSum:
        pairs = list(pairs)
        n = pairs[0][1].n_qubits
        acc: dict = {}
        for c, p in pairs:
            acc[p.x, p.z] = acc.get((p.x, p.z), 0) + c
        return cls(n, acc)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        return (
            isinstance(other, PauliSum)
            and self.n_qubits == other.n_qubits
            and self._terms == other._terms
        )

    def items(self) -> list[tuple[PauliString, complex]]:
        """Terms in canonical order: by weight, then by label."""
        out = [(PauliString(self.n_qubits, x, z), c) for (x, z), c in self._terms.items()]
        out.sort(key=lambda t: t[0].sort_key())
        return out

    def raw_terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def coefficient(self, p: PauliString) -> complex:
        return self._terms.get((p.x, p.z), 0.0)

    def _check(self, other):
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")

    def __add__(self, other: PauliSum) -> PauliSum:
        self._check(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return PauliSum(self.n_qubits, acc)

    def __neg__(self):
        return PauliSum(self.n_qubits, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-other)

    def scale(self, c: complex) -> PauliSum:
        return PauliSum(self.n_qubits, {k: c * v for k, v in self._terms.items()})

    __rmul__ = scale

    def __matmul__(self, other: PauliSum) -> PauliSum:
        self._check(other)
        acc: dict = {}
        for (x1, z1), c1 in self._terms.items():
            for (x2, z2), c2 in other._terms.items():
                ph, x3, z3 = _mul_masks(x1, z1, x2, z2)
                acc[x3, z3] = acc.get((x3, z3), 0) + ph * c1 * c2
        return PauliSum(self.n_qubits, acc)

    def adjoint(self) -> PauliSum:
        return PauliSum(self.n_qubits, {k: v.conjugate() for k, v in self._terms.items()})

    def commutator(self, other: PauliSum) -> PauliSum:
        return self @ other - other @ self

    def simplify(self, tol: float = PRUNE_TOL) -> PauliSum:
        out = PauliSum(self.n_qubits)
        out._terms = {k: v for k, v in self._terms.items() if abs(v) >= tol}
        return out

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag) < tol for c in self._terms.values())

    def is_antihermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.real) < tol for c in self._terms.values())

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        idx = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        for (x, z), c in self._terms.items():
            sign = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
            # P|b> = i^{|xz|} (-1)^{|z & b|} |b ^ x>
            out[idx ^ x, idx] += c * _PHASES[_popcount(x & z) % 4] * sign
        return out

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, terms={len(self)})"


# --- text dump ---------------------------------------------------------------

def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"({c.real:+.16e})"
    return f"({c.real:+.16e}{c.imag:+.16e}j)"


def dump_pauli_sum(op: PauliSum) -> str:
    """One term per line, ``(+1.0000000000000000e+00) X0 Z2``; identity as ``()``."""
    lines = []
    for p, c in op.items():
        lines.append(f"{_fmt_coeff(c)} {p.label() or '()'}")
    return "\n".join(lines) + ("\n" if lines else "")


_DUMP_LINE = re.compile(r"^\((?P<c>[^)]*)\)\s*(?P<ops>.*)$")


def parse_pauli_sum(text: str, n_qubits: int) -> PauliSum:
    acc: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        m = _DUMP_LINE.match(line.strip())
        if m is None:
            raise ValueError(f"bad Pauli dump line {line!r}")
        c = complex(m["c"])
        ops = m["ops"].strip()
        labels = [] if ops in ("", "()") else [(int(t[1:]), t[0]) for t in ops.split()]
        p = PauliString.from_label(n_qubits, labels)
        acc[p.x, p.z] = acc.get((p.x, p.z), 0) + c
    return PauliSum(n_qubits, acc)


# --- Jordan-Wigner -----------------------------------------------------------

def jw_annihilation(p: int, n_qubits: int) -> PauliSum:
    """a_p -> Z_0 ... Z_{p-1} (X_p + i Y_p) / 2."""
    if not 0 <= p < n_qubits:
        raise ValueError(f"spin orbital {p} out of range for {n_qubits} qubits")
    zs = (1 << p) - 1
    bit = 1 << p
    return PauliSum(n_qubits, {(bit, zs): 0.5, (bit, zs | bit): 0.5j})


def jw_creation(p: int, n_qubits: int) -> PauliSum:
    return jw_annihilation(p, n_qubits).adjoint()


def jw_number(p: int, n_qubits: int) -> PauliSum:
    return PauliSum(n_qubits, {(0, 0): 0.5, (0, 1 << p): -0.5})


def number_operator(n_qubits: int) -> PauliSum:
    acc = PauliSum(n_qubits)
    for p in range(n_qubits):
        acc = acc + jw_number(p, n_qubits)
    return acc


def sz_operator(n_qubits: int) -> PauliSum:
    """Total S_z with alpha on even and beta on odd qubits."""
    acc = PauliSum(n_qubits)
    for p in range(n_qubits):
        acc = acc + jw_number(p, n_qubits).scale(0.5 if p % 2 == 0 else -0.5)
    return acc


def jw_excitation(creators: Iterable[int], annihilators: Iterable[int], n_qubits: int) -> PauliSum:
    """Product a+_{c0} a+_{c1} ... a_{..} a_{a0} in the order given."""
    op = PauliSum.identity(n_qubits)
    for c in creators:
        op = op @ jw_creation(c, n_qubits)
    for a in annihilators:
        op = op @ jw_annihilation(a, n_qubits)
    return op


def spin_orbital(m: int, spin: int) -> int:
    """Interleaved ordering: alpha of spatial orbital m on 2m, beta on 2m + 1."""
    return 2 * m + spin


def map_hamiltonian(problem) -> PauliSum:
    """Jordan-Wigner image of the active-space Hamiltonian (identity carries E_I).

    Uses H = E_I + sum_pq k_pq E_pq + 1/2 sum_pqrs (pq|rs) E_pq E_rs with
    k_pq = h_pq - 1/2 sum_r (pr|rq), E_pq summed over spin.
    """
    ints = problem.active_integrals
    m = ints.n_orb
    n = 2 * m
    h = np.asarray(ints.h_one)
    g = np.asarray(ints.eri)
    k = h - 0.5 * np.einsum("prrq->pq", g) if m else h
    e_ops = {}
    for p in range(m):
        for q in range(m):
            acc = PauliSum(n)
            for s in (0, 1):
                acc = acc + (jw_creation(2 * p + s, n) @ jw_annihilation(2 * q + s, n))
            e_ops[p, q] = acc

    ham: dict = {(0, 0): ints.e_core}

    def accumulate(op: PauliSum, c: float):
        for key, v in op._terms.items():
            ham[key] = ham.get(key, 0) + c * v

    for p in range(m):
        for q in range(m):
            if k[p, q] != 0.0:
                accumulate(e_ops[p, q], k[p, q])
    for p in range(m):
        for q in range(m):
            inner: dict = {}
            for r in range(m):
                for s in range(m):
                    v = g[p, q, r, s]
                    if v != 0.0:
                        for key, c in e_ops[r, s]._terms.items():
                            inner[key] = inner.get(key, 0) + 0.5 * v * c
            if inner:
                accumulate(e_ops[p, q] @ PauliSum(n, inner), 1.0)
    out = PauliSum(n, ham)
    if not out.is_hermitian(1e-10):
        raise ArithmeticError("mapped Hamiltonian is not Hermitian")
    return PauliSum(n, {key: c.real for key, c in out._terms.items()})


def anticommutation_check(p: int, q: int, n_qubits: int) -> bool:
    """Verify {a_p, a_q} = 0 and {a_p, a_q^dagger} = delta_pq as Pauli sums."""
    ap, aq = jw_annihilation(p, n_qubits), jw_annihilation(q, n_qubits)
    aqd = jw_creation(q, n_qubits)
    mixed = (ap @ aqd + aqd @ ap).simplify()
    pure = (ap @ aq + aq @ ap).simplify()
    expected = PauliSum.identity(n_qubits) if p == q else PauliSum(n_qubits)
    return mixed == expected and not pure
