"""Unitary coupled-cluster VQE on active-space Hamiltonians, simulated exactly."""

from uccvqe.active import (
    DensityMatrix1P,
    NoonSpectrum,
    mp2_energy_and_density,
    noon_spectrum,
    rotate_integrals,
    select_active,
)
from uccvqe.ansatz import AnsatzProgram, Excitation, build_ansatz, build_kupccgsd, build_uccgsd, build_uccsd
from uccvqe.circuit import GateCircuit, ResourceReport, resources, synthesize
from uccvqe.exact import build_basis, ground_energy, sector_spectrum
from uccvqe.integrals import (
    ActiveSpaceProblem,
    SpatialIntegrals,
    build_active_space,
    full_space,
    parse_fcidump,
    read_fcidump,
    reference_energy,
    write_fcidump,
)
from uccvqe.pauli import PauliString, PauliSum, map_hamiltonian
from uccvqe.vqe import VqeConfig, VqeObjective, VqeResult, run_vqe

__version__ = "0.1.0"
