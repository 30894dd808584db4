"""Parameter, gate and CNOT counts for a 10-orbital, 10-electron active space.

Circuit counts follow this package's synthesis: X preparation, basis
changes, CNOT ladders and one RZ per Pauli string.

    python3 scripts/resource_table.py [--orbitals 10] [--electrons 10]
"""

import argparse

from uccvqe.ansatz import build_ansatz
from uccvqe.circuit import resources, synthesize

ROWS = [("uccsd", 1), ("uccgsd", 1), ("kupccgsd", 1), ("kupccgsd", 3), ("kupccgsd", 5)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--orbitals", type=int, default=10)
    ap.add_argument("--electrons", type=int, default=10)
    args = ap.parse_args()
    print(f"{'ansatz':<16}{'params':>8}{'depth':>10}{'gates':>10}{'cnots':>10}")
    for family, k in ROWS:
        circuit = synthesize(build_ansatz(family, args.orbitals, args.electrons, k))
        r = resources(circuit)
        name = f"{k}-UpCCGSD" if family == "kupccgsd" else family.upper()
        print(f"{name:<16}{r.parameter_count:>8}{r.circuit_depth:>10}{r.total_gates:>10}{r.cnot_gates:>10}")


if __name__ == "__main__":
    main()
