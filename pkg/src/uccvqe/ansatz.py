"""Excitation generators for UCCSD, UCCGSD and k-UpCCGSD.

Every excitation is a product of one or two same-spin single excitations,
``T = a+_{c0} a_{a0} [a+_{c1} a_{a1}]`` on interleaved spin orbitals
(alpha of spatial orbital m on 2m, beta on 2m + 1). The generator is
``G = T - T^dagger`` and the program applies ``exp(theta_j G_j)`` in list
order, i.e. a single Trotter step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache

from uccvqe.integrals import closed_shell_occupation
from uccvqe.pauli import PauliSum, jw_annihilation, jw_creation

FAMILIES = ("uccsd", "uccgsd", "kupccgsd")


@dataclass(frozen=True)
class Excitation:
    kind: str  # "single", "double" or "paired-double"
    creators: tuple[int, ...]
    annihilators: tuple[int, ...]
    slot: int = -1
    block: int = 0

    def __post_init__(self):
        if len(self.creators) != len(self.annihilators):
            raise ValueError("creators and annihilators must pair up")
        if set(self.creators) & set(self.annihilators):
            raise ValueError("creators and annihilators overlap")
        for c, a in zip(self.creators, self.annihilators):
            if c % 2 != a % 2:
                raise ValueError("each factor must conserve spin")

    def factors(self) -> list[tuple[int, int]]:
        return list(zip(self.creators, self.annihilators))


@dataclass(frozen=True)
class AnsatzProgram:
    family: str
    n_spatial: int
    n_elec: int
    excitations: tuple[Excitation, ...]
    k: int = 1
    generators: tuple[PauliSum, ...] | None = field(default=None, compare=False)

    @property
    def n_params(self) -> int:
        return len(self.excitations)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_spatial

    @property
    def reference_occupation(self) -> tuple[int, ...]:
        return closed_shell_occupation(self.n_spatial, self.n_elec)

    def dump(self) -> str:
        """One line per generator: family, slot, kind, block, creators, annihilators."""
        lines = []
        for ex in self.excitations:
            c = ",".join(map(str, ex.creators))
            a = ",".join(map(str, ex.annihilators))
            lines.append(f"{self.family} {ex.slot} {ex.kind} {ex.block} {c} {a}")
        return "\n".join(lines) + ("\n" if lines else "")


def _single(p: int, q: int, spin: int) -> Excitation:
    """Move an electron of the given spin from spatial orbital p to q."""
    return Excitation("single", (2 * q + spin,), (2 * p + spin,))


def _mixed_double(i: int, a: int, j: int, b: int) -> Excitation:
    """Alpha i -> a times beta j -> b."""
    return Excitation("double", (2 * a, 2 * b + 1), (2 * i, 2 * j + 1))


def _lex(ex: Excitation):
    return (ex.annihilators, ex.creators)


def _number(excitations, per_block=None) -> tuple[Excitation, ...]:
    out = []
    for slot, ex in enumerate(excitations):
        block = slot // per_block if per_block else 0
        out.append(replace(ex, slot=slot, block=block))
    return tuple(out)


def build_uccsd(n_spatial: int, n_elec: int) -> AnsatzProgram:
    """Occupied-to-virtual singles per spin plus alpha-beta products of them.

    Same-spin doubles are not separate parameters; at (10o, 10e) this gives
    50 singles and 625 doubles.
    """
    if n_elec % 2:
        raise ValueError("UCCSD needs a closed-shell reference (even n_elec)")
    if not 0 <= n_elec <= 2 * n_spatial:
        raise ValueError("n_elec out of range")
    occ = range(n_elec // 2)
    vir = range(n_elec // 2, n_spatial)
    singles = sorted(
        (_single(i, a, s) for s in (0, 1) for i in occ for a in vir), key=_lex
    )
    doubles = sorted(
        (_mixed_double(i, a, j, b) for i in occ for a in vir for j in occ for b in vir),
        key=_lex,
    )
    return AnsatzProgram("uccsd", n_spatial, n_elec, _number(singles + doubles))


def build_uccgsd(n_spatial: int, n_elec: int = 0) -> AnsatzProgram:
    """Generalised singles p<q per spin and alpha-beta products of them.

    Count: 2 C(M,2) + C(M,2)**2.
    """
    if n_spatial < 1:
        raise ValueError("n_spatial must be positive")
    pairs = list(itertools.combinations(range(n_spatial), 2))
    singles = sorted((_single(p, q, s) for s in (0, 1) for p, q in pairs), key=_lex)
    doubles = sorted(
        {_mixed_double(p, q, r, s) for p, q in pairs for r, s in pairs}, key=_lex
    )
    return AnsatzProgram("uccgsd", n_spatial, n_elec, _number(singles + doubles))


def build_kupccgsd(n_spatial: int, k: int, n_elec: int = 0) -> AnsatzProgram:
    """k blocks of generalised singles (per spin) and paired doubles.

    Each block has 3 C(M,2) independent parameters; block 0 acts first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pairs = list(itertools.combinations(range(n_spatial), 2))
    singles = sorted((_single(p, q, s) for s in (0, 1) for p, q in pairs), key=_lex)
    paired = sorted(
        (Excitation("paired-double", (2 * q, 2 * q + 1), (2 * p, 2 * p + 1)) for p, q in pairs),
        key=_lex,
    )
    block = singles + paired
    return AnsatzProgram(
        "kupccgsd", n_spatial, n_elec, _number(block * k, per_block=len(block)), k=k
    )


def build_ansatz(family: str, n_spatial: int, n_elec: int, k: int = 1) -> AnsatzProgram:
    family = family.lower()
    if family == "uccsd":
        return build_uccsd(n_spatial, n_elec)
    if family == "uccgsd":
        return build_uccgsd(n_spatial, n_elec)
    if family == "kupccgsd":
        return build_kupccgsd(n_spatial, k, n_elec)
    raise ValueError(f"unknown ansatz family {family!r}; expected one of {FAMILIES}")


@lru_cache(maxsize=None)
def _generator(creators, annihilators, n_qubits) -> PauliSum:
    t = PauliSum.identity(n_qubits)
    for c, a in zip(creators, annihilators):
        t = t @ jw_creation(c, n_qubits) @ jw_annihilation(a, n_qubits)
    g = (t - t.adjoint()).simplify()
    if not g.is_antihermitian(1e-12):
        raise ArithmeticError(f"generator {creators}<-{annihilators} is not anti-Hermitian")
    strings = [p for p, _ in g.items()]
    for p1, p2 in itertools.combinations(strings, 2):
        if not p1.commutes_with(p2):
            raise ArithmeticError("generator strings do not commute")
    return g


def excitation_generator(ex: Excitation, n_qubits: int) -> PauliSum:
    return _generator(ex.creators, ex.annihilators, n_qubits)


def map_generators(program: AnsatzProgram, n_qubits: int | None = None) -> AnsatzProgram:
    """Attach the Jordan-Wigner image of every generator."""
    n = n_qubits or program.n_qubits
    gens = tuple(excitation_generator(ex, n) for ex in program.excitations)
    return replace(program, generators=gens)
