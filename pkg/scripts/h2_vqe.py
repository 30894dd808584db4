"""VQE on the shipped H2/STO-3G integrals for all three ansatz families.

    python3 scripts/h2_vqe.py [--fcidump tests/data/h2_sto3g.fcidump]
"""

import argparse
from pathlib import Path

from uccvqe.cli import kcal
from uccvqe.exact import ground_energy
from uccvqe.integrals import full_space, read_fcidump, reference_energy
from uccvqe.vqe import VqeConfig, run_vqe

DEFAULT = Path(__file__).resolve().parents[1] / "tests" / "data" / "h2_sto3g.fcidump"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--fcidump", type=Path, default=DEFAULT)
    args = ap.parse_args()
    problem = full_space(read_fcidump(args.fcidump))
    e_exact = ground_energy(problem)[0]
    print(f"reference {reference_energy(problem):.10f}  exact {e_exact:.10f}")
    for family, k in [("uccsd", 1), ("uccgsd", 1), ("kupccgsd", 1), ("kupccgsd", 2)]:
        res = run_vqe(problem, VqeConfig(family=family, k=k))
        print(
            f"{family:<9} k={k}  params={len(res.theta):>3}  E={res.energy:.10f}  "
            f"error={kcal(res.energy - e_exact):+.2e} kcal/mol  ({res.reason}, {len(res.trace) - 1} it)"
        )


if __name__ == "__main__":
    main()
