"""Time one energy+gradient evaluation per ansatz on synthetic active spaces.

    python3 scripts/scale_benchmark.py [--orbitals 4 6 8 10] [--repeat 3]
"""

import argparse
import time

import numpy as np

from uccvqe.ansatz import build_ansatz
from uccvqe.integrals import full_space
from uccvqe.synthetic import random_integrals
from uccvqe.vqe import VqeObjective


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--orbitals", type=int, nargs="+", default=[4, 6, 8, 10])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--backend", choices=("sector", "statevector"), default="sector")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'M':>3}{'qubits':>8}  {'ansatz':<12}{'params':>8}{'seconds':>10}")
    for m in args.orbitals:
        problem = full_space(random_integrals(m, m - m % 2, seed=m))
        for family, k in [("uccsd", 1), ("kupccgsd", 5), ("uccgsd", 1)]:
            obj = VqeObjective(problem, build_ansatz(family, m, problem.n_active_elec, k), args.backend)
            theta = rng.uniform(-0.1, 0.1, obj.n_params)
            t0 = time.perf_counter()
            for _ in range(args.repeat):
                obj.energy_and_gradient(theta)
            dt = (time.perf_counter() - t0) / args.repeat
            label = f"{family}{k}" if family == "kupccgsd" else family
            print(f"{m:>3}{2 * m:>8}  {label:<12}{obj.n_params:>8}{dt:>10.3f}")


if __name__ == "__main__":
    main()
