"""Energy, adjoint gradient and optimisation of Trotterised UCC ansätze.

Two exact backends evaluate the same objective:

``"sector"`` (default)
    The state is kept in the (n_alpha, n_beta) determinant sector of the
    reference; each generator is applied as the 2x2 rotation it induces
    between determinant pairs, and H acts through the matrix-free sigma
    build of :mod:`uccvqe.exact`. This is what makes 20-qubit active
    spaces cheap.

``"statevector"``
    The full 2**n Jordan-Wigner statevector, generators applied as products
    of commuting Pauli rotations and H as a Pauli sum.

Both compute the derivative of the single-Trotter-step energy by one
reverse sweep over the generators.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from uccvqe.ansatz import AnsatzProgram, build_ansatz, map_generators
from uccvqe.circuit import apply_pauli_string, apply_pauli_sum, basis_state
from uccvqe.exact import (
    SectorHamiltonian,
    build_basis,
    reference_sector_vector,
    sector_to_statevector,
)
from uccvqe.integrals import ActiveSpaceProblem
from uccvqe.optim import TraceRow, minimize_lbfgs
from uccvqe.pauli import map_hamiltonian

BACKENDS = ("sector", "statevector")


# --- sector kernels ----------------------------------------------------------

class _SectorGenerators:
    """Index tables turning each excitation into determinant-pair rotations."""

    def __init__(self, program: AnsatzProgram, basis):
        self.ops = []
        cache = {}
        for ex in program.excitations:
            key = (ex.creators, ex.annihilators)
            if key not in cache:
                cache[key] = self._tables(ex, basis)
            self.ops.append(cache[key])

    @staticmethod
    def _tables(ex, basis):
        alpha = beta = None
        for c, a in ex.factors():
            if c % 2 == 0:
                if alpha is not None:
                    raise NotImplementedError("same-spin double excitations")
                alpha = basis.alpha.excitation(c // 2, a // 2)
            else:
                if beta is not None:
                    raise NotImplementedError("same-spin double excitations")
                beta = basis.beta.excitation(c // 2, a // 2)
        if alpha is not None and beta is not None:
            (sa, da, ga), (sb, db, gb) = alpha, beta
            return ("ab", np.ix_(sa, sb), np.ix_(da, db), np.outer(ga, gb))
        if alpha is not None:
            src, dst, sg = alpha
            return ("a", src, dst, sg[:, None])
        src, dst, sg = beta
        return ("b", (slice(None), src), (slice(None), dst), sg[None, :])

    def rotate(self, j: int, angle: float, psi: np.ndarray):
        """psi <- exp(angle * G_j) psi, in place."""
        if angle == 0.0:
            return
        _, src, dst, sg = self.ops[j]
        c, s = math.cos(angle), math.sin(angle)
        a, b = psi[src], psi[dst]
        psi[src] = c * a - s * sg * b
        psi[dst] = c * b + s * sg * a

    def apply(self, j: int, psi: np.ndarray) -> np.ndarray:
        _, src, dst, sg = self.ops[j]
        out = np.zeros_like(psi)
        out[dst] = sg * psi[src]
        out[src] = -sg * psi[dst]
        return out

    def overlap(self, j: int, lam: np.ndarray, psi: np.ndarray) -> float:
        """Re <lam| G_j |psi>."""
        _, src, dst, sg = self.ops[j]
        val = np.sum(np.conj(lam[dst]) * sg * psi[src]) - np.sum(np.conj(lam[src]) * sg * psi[dst])
        return float(np.real(val))


class VqeObjective:
    """E(theta) = <ref| U(theta)^dagger H U(theta) |ref> for one program."""

    def __init__(self, problem: ActiveSpaceProblem, program: AnsatzProgram, backend: str = "sector"):
        if backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if program.n_spatial != problem.n_active:
            raise ValueError("program and problem disagree on the active orbital count")
        if program.n_elec != problem.n_active_elec:
            raise ValueError("program and problem disagree on the active electron count")
        self.problem = problem
        self.program = program
        self.backend = backend
        self.n_params = program.n_params
        if backend == "sector":
            self.basis = build_basis(problem.n_active, problem.n_alpha, problem.n_beta)
            self.hamiltonian = SectorHamiltonian(problem, self.basis)
            self._gens = _SectorGenerators(program, self.basis)
            self._ref = reference_sector_vector(self.basis)
        else:
            self.program = program if program.generators is not None else map_generators(program)
            self.hamiltonian = map_hamiltonian(problem)
            self._ref = basis_state(problem.n_qubits, problem.reference_occupation)
            self._terms = [[(p.x, p.z, c.imag) for p, c in g.items()] for g in self.program.generators]

    # backend primitives ---------------------------------------------------

    def _rotate(self, j, angle, psi):
        if self.backend == "sector":
            self._gens.rotate(j, angle, psi)
            return psi
        if angle == 0.0:
            return psi
        n = self.problem.n_qubits
        for x, z, c in self._terms[j]:
            phi = c * angle
            psi = math.cos(phi) * psi + 1j * math.sin(phi) * apply_pauli_string(x, z, psi, n)
        return psi

    def _h(self, psi):
        if self.backend == "sector":
            return self.hamiltonian.matvec(psi)
        return apply_pauli_sum(self.hamiltonian, psi)

    def _overlap(self, j, lam, psi):
        if self.backend == "sector":
            return self._gens.overlap(j, lam, psi)
        gpsi = apply_pauli_sum(self.program.generators[j], psi)
        return float(np.real(np.vdot(lam, gpsi)))

    # public API ----------------------------------------------------------

    def _check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        return theta

    def state(self, theta) -> np.ndarray:
        theta = self._check(theta)
        psi = self._ref.copy()
        for j, t in enumerate(theta):
            psi = self._rotate(j, t, psi)
        return psi

    def statevector(self, theta) -> np.ndarray:
        """Full Jordan-Wigner statevector regardless of backend."""
        psi = self.state(theta)
        if self.backend == "sector":
            return sector_to_statevector(psi, self.basis)
        return psi

    def energy(self, theta) -> float:
        psi = self.state(theta)
        return float(np.real(np.vdot(psi, self._h(psi))))

    def energy_and_gradient(self, theta) -> tuple[float, np.ndarray]:
        """One forward pass, then a reverse sweep undoing each generator."""
        theta = self._check(theta)
        psi = self.state(theta)
        lam = self._h(psi)
        e = float(np.real(np.vdot(psi, lam)))
        grad = np.zeros(self.n_params)
        for j in reversed(range(self.n_params)):
            grad[j] = 2.0 * self._overlap(j, lam, psi)
            psi = self._rotate(j, -theta[j], psi)
            lam = self._rotate(j, -theta[j], lam)
        return e, grad

    def gradient(self, theta) -> np.ndarray:
        return self.energy_and_gradient(theta)[1]

    def finite_difference_gradient(self, theta, h: float = 1e-5) -> np.ndarray:
        theta = self._check(theta)
        out = np.zeros(self.n_params)
        for j in range(self.n_params):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            out[j] = (self.energy(tp) - self.energy(tm)) / (2 * h)
        return out


@dataclass
class VqeConfig:
    family: str = "uccsd"
    k: int = 1
    tol_energy: float = 1e-8
    tol_grad: float = 1e-6
    max_iter: int = 10000
    memory: int = 10
    bounds: list[tuple[float, float]] | None = None
    initial: np.ndarray | None = None
    backend: str = "sector"

    def __post_init__(self):
        if self.tol_energy <= 0 or self.tol_grad <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.bounds is not None and any(lo > hi for lo, hi in self.bounds):
            raise ValueError("bounds need lower <= upper")


@dataclass
class VqeResult:
    energy: float
    theta: np.ndarray
    trace: list[TraceRow]
    converged: bool
    reason: str
    wall_time: float
    n_evaluations: int = 0
    program: AnsatzProgram | None = field(default=None, repr=False)

    def write_trace(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["iteration", "energy", "grad_norm", "step_size"])
            for row in self.trace:
                w.writerow([row.iteration, repr(row.energy), repr(row.grad_norm), repr(row.step_size)])


def run_vqe(
    problem: ActiveSpaceProblem,
    config: VqeConfig,
    program: AnsatzProgram | None = None,
) -> VqeResult:
    """Optimise from zero parameters (or ``config.initial``)."""
    if program is None:
        program = build_ansatz(config.family, problem.n_active, problem.n_active_elec, config.k)
    objective = VqeObjective(problem, program, backend=config.backend)
    x0 = np.zeros(program.n_params) if config.initial is None else np.asarray(config.initial, float)
    if x0.shape != (program.n_params,):
        raise ValueError(f"initial vector has length {len(x0)}, program needs {program.n_params}")
    if config.bounds is not None and len(config.bounds) != program.n_params:
        raise ValueError("bounds length does not match the parameter count")
    t0 = time.perf_counter()
    res = minimize_lbfgs(
        objective.energy_and_gradient,
        x0,
        bounds=config.bounds,
        memory=config.memory,
        tol_f=config.tol_energy,
        tol_g=config.tol_grad,
        max_iter=config.max_iter,
    )
    reason = res.reason
    if config.max_iter == 0 and reason == "max_iter":
        reason = "no iterations requested"
    return VqeResult(
        energy=res.fun,
        theta=res.x,
        trace=res.trace,
        converged=res.converged,
        reason=reason,
        wall_time=time.perf_counter() - t0,
        n_evaluations=res.n_eval,
        program=program,
    )
