"""Command-line front end: inspect, select, estimate, vqe, exact, mp2, voltage.

Every subcommand prints a short human summary and, with ``--json PATH``,
writes a JSON document whose ``result`` block is a deterministic function
of the inputs. Wall-clock data lives in a separate ``timing`` block.

Exit codes: 0 success, 2 input error, 3 convergence failure,
4 resource-cap refusal.
"""

from __future__ import annotations

import argparse
import contextlib
import datetime as _dt
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from uccvqe.active import (
    DEFAULT_THRESHOLD,
    DegenerateGapError,
    SelectionError,
    mp2_energy_and_density,
    noon_spectrum,
    read_density,
    rotate_integrals,
    select_active,
)
from uccvqe.ansatz import FAMILIES, build_ansatz
from uccvqe.circuit import dump_circuit, resources, synthesize
from uccvqe.exact import BASIS_CAP, BasisTooLargeError, ConvergenceError, sector_spectrum
from uccvqe.integrals import (
    ActiveSpaceError,
    ActiveSpaceProblem,
    FcidumpError,
    SpatialIntegrals,
    build_active_space,
    full_space,
    read_fcidump,
    reference_energy,
    write_fcidump,
)
from uccvqe.pauli import dump_pauli_sum, map_hamiltonian
from uccvqe.vqe import VqeConfig, run_vqe

HARTREE_TO_KCAL_MOL = 627.5094740631
HARTREE_TO_VOLT = 27.211386245988  # 1 hartree / e in volts
STATEVECTOR_QUBIT_CAP = 24

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_RESOURCE = 0, 2, 3, 4


class InputError(ValueError):
    pass


class ConvergenceFailure(RuntimeError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


def voltage(e_lithiated: float, e_delithiated: float, e_li: float, x1: float, x2: float) -> float:
    """Average intercalation voltage between Li contents x1 and x2.

    ``e_lithiated`` is E(Li_x1 host), ``e_delithiated`` is E(Li_x2 host),
    ``e_li`` the energy of metallic Li per atom, all in hartree. Returns
    -[E(x2) - E(x1) - (x2 - x1) E(Li)] / (x2 - x1) converted to volts.
    """
    if x1 == x2:
        raise InputError("x1 and x2 must differ")
    dx = x2 - x1
    return -(e_delithiated - e_lithiated - dx * e_li) / dx * HARTREE_TO_VOLT


def kcal(delta_hartree: float) -> float:
    return delta_hartree * HARTREE_TO_KCAL_MOL


def _round15(obj):
    """Round floats to 15 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}") if math.isfinite(obj) else None
    if isinstance(obj, np.floating):
        return _round15(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round15(v) for v in obj]
    return obj


def render_json(command: str, result: dict, timing: dict | None = None) -> str:
    doc = {"command": command, "result": _round15(result), "timing": _round15(timing or {})}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- configuration -----------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    fcidump: Path | None = None
    pdm: Path | None = None
    ansatz: str = "uccsd"
    k: int = 1
    threshold: float | None = None
    active: list[int] | None = None
    nelec_active: int | None = None
    tol_energy: float = 1e-8
    tol_grad: float = 1e-6
    max_iter: int = 10000
    backend: str = "sector"
    trace: Path | None = None
    dump_hamiltonian: Path | None = None
    dump_circuit: Path | None = None
    json: Path | None = None
    out: Path | None = None
    oracle: bool = True
    n_roots: int = 1
    voltage_args: dict = field(default_factory=dict)

    def validate(self):
        if self.command != "voltage":
            if self.fcidump is None:
                raise InputError("--fcidump is required")
            if not self.fcidump.is_file():
                raise InputError(f"FCIDUMP not found: {self.fcidump}")
        if self.pdm is not None and not self.pdm.is_file():
            raise InputError(f"density file not found: {self.pdm}")
        if self.active is not None and self.threshold is not None:
            raise InputError("give either --active or --threshold, not both")
        if self.active is not None and self.nelec_active is None:
            raise InputError("--active needs --nelec-active")
        if self.nelec_active is not None and self.active is None:
            raise InputError("--nelec-active only applies together with --active")
        if self.threshold is not None and not 0 < self.threshold < 1:
            raise InputError("--threshold must lie in (0, 1)")
        if self.ansatz not in FAMILIES:
            raise InputError(f"--ansatz must be one of {FAMILIES}")
        if self.k < 1:
            raise InputError("--k must be positive")
        if self.tol_energy <= 0 or self.tol_grad <= 0:
            raise InputError("tolerances must be positive")
        if self.max_iter < 0:
            raise InputError("--max-iter must be non-negative")
        return self


def _parse_active(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad orbital list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uccvqe", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fcidump=True):
        if fcidump:
            p.add_argument("--fcidump", type=Path, required=True)
        p.add_argument("--json", type=Path, help="write the structured report here")

    def active_opts(p):
        p.add_argument("--pdm", type=Path, help="1-PDM text file (default: MP2 density)")
        p.add_argument("--threshold", type=float, help="NOON window (thr, 2-thr)")
        p.add_argument("--active", type=_parse_active, help='explicit orbitals "i,j,k" (0-based)')
        p.add_argument("--nelec-active", type=int)

    def ansatz_opts(p):
        p.add_argument("--ansatz", choices=FAMILIES, default="uccsd")
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--dump-circuit", type=Path)

    p = sub.add_parser("inspect", help="integral statistics and qubit count")
    common(p)
    p.add_argument("--dump-hamiltonian", type=Path)

    p = sub.add_parser("select", help="NOON-based active space and reduced FCIDUMP")
    common(p)
    active_opts(p)
    p.add_argument("--out", type=Path, help="reduced FCIDUMP path")

    p = sub.add_parser("estimate", help="ansatz resources without simulation")
    common(p)
    active_opts(p)
    ansatz_opts(p)

    p = sub.add_parser("vqe", help="optimise the Trotterised ansatz from zero parameters")
    common(p)
    active_opts(p)
    ansatz_opts(p)
    p.add_argument("--tol-energy", type=float, default=1e-8)
    p.add_argument("--tol-grad", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--backend", choices=("sector", "statevector"), default="sector")
    p.add_argument("--trace", type=Path, help="CSV convergence trace")
    p.add_argument("--dump-hamiltonian", type=Path)
    p.add_argument("--oracle", choices=("on", "off"), default="on")

    p = sub.add_parser("exact", help="exact diagonalisation in the active space")
    common(p)
    active_opts(p)
    p.add_argument("--nroots", type=int, default=1)

    p = sub.add_parser("mp2", help="MP2 energy and natural occupations")
    common(p)

    p = sub.add_parser("voltage", help="average intercalation voltage")
    common(p, fcidump=False)
    p.add_argument("--e-lithiated", type=float, required=True, help="E(Li_x1 host), hartree")
    p.add_argument("--e-delithiated", type=float, required=True, help="E(Li_x2 host), hartree")
    p.add_argument("--e-li", type=float, required=True, help="E(Li) per atom, hartree")
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--x2", type=float, default=0.0)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    get = lambda name, default=None: getattr(args, name, default)  # noqa: E731
    cfg = RunConfig(
        command=args.command,
        fcidump=get("fcidump"),
        pdm=get("pdm"),
        ansatz=get("ansatz", "uccsd"),
        k=get("k", 1),
        threshold=get("threshold"),
        active=get("active"),
        nelec_active=get("nelec_active"),
        tol_energy=get("tol_energy", 1e-8),
        tol_grad=get("tol_grad", 1e-6),
        max_iter=get("max_iter", 10000),
        backend=get("backend", "sector"),
        trace=get("trace"),
        dump_hamiltonian=get("dump_hamiltonian"),
        dump_circuit=get("dump_circuit"),
        json=get("json"),
        out=get("out"),
        oracle=get("oracle", "on") == "on",
        n_roots=get("nroots", 1),
    )
    if args.command == "voltage":
        cfg.voltage_args = dict(
            e_lithiated=args.e_lithiated, e_delithiated=args.e_delithiated,
            e_li=args.e_li, x1=args.x1, x2=args.x2,
        )
    return cfg.validate()


# --- shared steps ------------------------------------------------------------

def _density(cfg: RunConfig, ints: SpatialIntegrals):
    if cfg.pdm is not None:
        dm = read_density(cfg.pdm)
        if dm.matrix.shape != (ints.n_orb, ints.n_orb):
            raise InputError(f"density is {dm.matrix.shape}, FCIDUMP has {ints.n_orb} orbitals")
        dm.check_physical(ints.n_elec)
        return dm, "file"
    return mp2_energy_and_density(ints)[1], "mp2"


def prepare_problem(cfg: RunConfig, ints: SpatialIntegrals) -> tuple[ActiveSpaceProblem, dict]:
    """Active-space problem from the configured mode.

    ``--active`` uses the orbitals of the file as given; ``--threshold``
    (or ``select``) rotates to natural orbitals first and freezes the most
    occupied ones; otherwise the full orbital space is used.
    """
    if cfg.active is not None:
        problem = build_active_space(ints, cfg.active, cfg.nelec_active)
        return problem, {"mode": "explicit", "orbital_basis": ints.orbital_basis}
    if cfg.threshold is not None or cfg.command == "select":
        thr = DEFAULT_THRESHOLD if cfg.threshold is None else cfg.threshold
        dm, source = _density(cfg, ints)
        spectrum = noon_spectrum(dm)
        active, n_act = select_active(spectrum, thr)
        rotated = rotate_integrals(ints, spectrum.rotation, orbital_basis="natural")
        problem = build_active_space(rotated, active, n_act)
        info = {
            "mode": "noon",
            "threshold": thr,
            "density_source": source,
            "orbital_basis": "natural",
            "occupations": spectrum.occupations.tolist(),
        }
        return problem, info
    return full_space(ints), {"mode": "full", "orbital_basis": ints.orbital_basis}


def _space_block(problem: ActiveSpaceProblem, info: dict) -> dict:
    return {
        **info,
        "active_list": list(problem.active_list),
        "inactive_list": list(problem.inactive_list),
        "n_active_orbitals": problem.n_active,
        "n_active_electrons": problem.n_active_elec,
        "n_qubits": problem.n_qubits,
        "inactive_energy": problem.inactive_energy,
    }


def _exact(problem: ActiveSpaceProblem, n_roots: int = 1) -> list[float]:
    return sector_spectrum(problem, n_roots, cap=BASIS_CAP)


def _write(path: Path | None, text: str):
    if path is not None:
        Path(path).write_text(text)


# --- subcommands -------------------------------------------------------------

def cmd_inspect(cfg: RunConfig, ints: SpatialIntegrals):
    n = ints.n_orb
    p, q = np.tril_indices(n)
    pair_block = ints.eri[p[:, None], q[:, None], p[None, :], q[None, :]]
    eri_unique = int(np.count_nonzero(np.tril(pair_block)))
    result = {
        "n_orb": n,
        "n_elec": ints.n_elec,
        "ms2": ints.ms2,
        "n_qubits": 2 * n,
        "e_core": ints.e_core,
        "one_electron_nonzero": int(np.count_nonzero(np.tril(ints.h_one))),
        "two_electron_unique_nonzero": eri_unique,
        "has_orbital_energies": ints.orb_energies is not None,
    }
    lines = [f"norb={n} nelec={ints.n_elec} qubits={2 * n}"]
    if cfg.dump_hamiltonian is not None:
        op = map_hamiltonian(full_space(ints))
        _write(cfg.dump_hamiltonian, dump_pauli_sum(op))
        result["pauli_terms"] = len(op)
        lines.append(f"pauli_terms={len(op)}")
    lines.append(
        f"one_electron={result['one_electron_nonzero']} two_electron={eri_unique}"
    )
    return result, lines


def cmd_select(cfg: RunConfig, ints: SpatialIntegrals):
    problem, info = prepare_problem(cfg, ints)
    reduced = problem.active_integrals
    if cfg.out is not None:
        _write(cfg.out, write_fcidump(reduced))
    result = _space_block(problem, info)
    result["reduced_fcidump"] = str(cfg.out) if cfg.out is not None else None
    lines = [
        f"active={problem.n_active} orbitals, {problem.n_active_elec} electrons, "
        f"qubits={problem.n_qubits}",
        f"active_list={list(problem.active_list)}",
    ]
    if "occupations" in info:
        occ = info["occupations"]
        lines.append("noon=" + " ".join(f"{x:.6f}" for x in occ))
    return result, lines


def cmd_estimate(cfg: RunConfig, ints: SpatialIntegrals):
    problem, info = prepare_problem(cfg, ints)
    program = build_ansatz(cfg.ansatz, problem.n_active, problem.n_active_elec, cfg.k)
    circuit = synthesize(program)
    report = resources(circuit)
    if cfg.dump_circuit is not None:
        _write(cfg.dump_circuit, dump_circuit(circuit))
    result = {
        "ansatz": cfg.ansatz,
        "k": cfg.k if cfg.ansatz == "kupccgsd" else None,
        "active_space": _space_block(problem, info),
        "resources": report.as_dict(),
    }
    r = report
    lines = [
        f"{cfg.ansatz}{'(k=%d)' % cfg.k if cfg.ansatz == 'kupccgsd' else ''} "
        f"qubits={problem.n_qubits} parameters={r.parameter_count} depth={r.circuit_depth} "
        f"gates={r.total_gates} cnots={r.cnot_gates}"
    ]
    return result, lines


def cmd_vqe(cfg: RunConfig, ints: SpatialIntegrals):
    problem, info = prepare_problem(cfg, ints)
    if cfg.backend == "statevector" and problem.n_qubits > STATEVECTOR_QUBIT_CAP:
        raise BasisTooLargeError(
            f"{problem.n_qubits} qubits exceeds the statevector cap of {STATEVECTOR_QUBIT_CAP}"
        )
    program = build_ansatz(cfg.ansatz, problem.n_active, problem.n_active_elec, cfg.k)
    if cfg.dump_hamiltonian is not None:
        _write(cfg.dump_hamiltonian, dump_pauli_sum(map_hamiltonian(problem)))
    report = None
    if cfg.dump_circuit is not None:
        circuit = synthesize(program)
        _write(cfg.dump_circuit, dump_circuit(circuit))
        report = resources(circuit).as_dict()
    config = VqeConfig(
        family=cfg.ansatz, k=cfg.k, tol_energy=cfg.tol_energy, tol_grad=cfg.tol_grad,
        max_iter=cfg.max_iter, backend=cfg.backend,
    )
    res = run_vqe(problem, config, program)
    if cfg.trace is not None:
        res.write_trace(cfg.trace)
    e_ref = reference_energy(problem)
    result = {
        "ansatz": cfg.ansatz,
        "k": cfg.k if cfg.ansatz == "kupccgsd" else None,
        "backend": cfg.backend,
        "active_space": _space_block(problem, info),
        "parameter_count": program.n_params,
        "energy": res.energy,
        "reference_energy": e_ref,
        "correlation_energy": res.energy - e_ref,
        "correlation_kcal_mol": kcal(res.energy - e_ref),
        "converged": res.converged,
        "reason": res.reason,
        "iterations": len(res.trace) - 1,
        "evaluations": res.n_evaluations,
        "theta": res.theta.tolist(),
    }
    if report is not None:
        result["resources"] = report
    lines = [
        f"E_vqe = {res.energy:.12f} Ha  ({res.reason}, {len(res.trace) - 1} iterations)",
        f"E_ref = {e_ref:.12f} Ha  dE = {kcal(res.energy - e_ref):+.6f} kcal/mol",
    ]
    if cfg.oracle:
        e_exact = _exact(problem)[0]
        result["exact_energy"] = e_exact
        result["error_vs_exact"] = res.energy - e_exact
        result["error_vs_exact_kcal_mol"] = kcal(res.energy - e_exact)
        lines.append(
            f"E_exact = {e_exact:.12f} Ha  E_vqe - E_exact = {kcal(res.energy - e_exact):+.6f} kcal/mol"
        )
    timing = {"optimizer_wall_time_s": res.wall_time}
    if not res.converged and res.reason != "no iterations requested":
        raise ConvergenceFailure(f"optimizer stopped without converging: {res.reason}", (result, lines, timing))
    return result, lines, timing


def cmd_exact(cfg: RunConfig, ints: SpatialIntegrals):
    problem, info = prepare_problem(cfg, ints)
    energies = _exact(problem, cfg.n_roots)
    e_ref = reference_energy(problem) if problem.n_active_elec % 2 == 0 else None
    result = {
        "active_space": _space_block(problem, info),
        "energies": energies,
        "ground_energy": energies[0],
        "reference_energy": e_ref,
    }
    lines = [f"E_exact = {energies[0]:.12f} Ha"]
    if e_ref is not None:
        result["correlation_kcal_mol"] = kcal(energies[0] - e_ref)
        lines.append(f"E_ref = {e_ref:.12f} Ha  dE = {kcal(energies[0] - e_ref):+.6f} kcal/mol")
    return result, lines


def cmd_mp2(cfg: RunConfig, ints: SpatialIntegrals):
    e_mp2, dm = mp2_energy_and_density(ints)
    e_ref = reference_energy(full_space(ints))
    spectrum = noon_spectrum(dm)
    result = {
        "reference_energy": e_ref,
        "mp2_energy": e_mp2,
        "correlation_energy": e_mp2 - e_ref,
        "correlation_kcal_mol": kcal(e_mp2 - e_ref),
        "occupations": spectrum.occupations.tolist(),
    }
    lines = [
        f"E_ref = {e_ref:.12f} Ha",
        f"E_mp2 = {e_mp2:.12f} Ha  dE = {kcal(e_mp2 - e_ref):+.6f} kcal/mol",
        "noon=" + " ".join(f"{x:.6f}" for x in spectrum.occupations),
    ]
    return result, lines


def cmd_voltage(cfg: RunConfig, ints=None):
    v = voltage(**cfg.voltage_args)
    result = {**cfg.voltage_args, "voltage_V": v}
    return result, [f"V = {v:.7f} V"]


COMMANDS = {
    "inspect": cmd_inspect,
    "select": cmd_select,
    "estimate": cmd_estimate,
    "vqe": cmd_vqe,
    "exact": cmd_exact,
    "mp2": cmd_mp2,
    "voltage": cmd_voltage,
}


def _emit(cfg, result, lines, timing, stdout):
    for line in lines:
        print(line, file=stdout)
    if cfg.json is not None:
        _write(cfg.json, render_json(cfg.command, result, timing))


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    t0 = time.perf_counter()
    cfg = None
    try:
        cfg = config_from_args(args)
        ints = read_fcidump(cfg.fcidump) if cfg.fcidump is not None else None
        out = COMMANDS[cfg.command](cfg, ints)
        result, lines = out[0], out[1]
        timing = out[2] if len(out) > 2 else {}
        code = EXIT_OK
    except ConvergenceFailure as exc:
        result, lines, timing = exc.payload
        print(f"error: {exc}", file=stderr)
        code = EXIT_CONVERGENCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONVERGENCE
    except (BasisTooLargeError, MemoryError) as exc:
        print(f"refused: {exc}", file=stderr)
        return EXIT_RESOURCE
    except FcidumpError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (InputError, ActiveSpaceError, SelectionError, DegenerateGapError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except FloatingPointError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONVERGENCE
    timing = {
        **timing,
        "started_utc": started,
        "wall_time_s": time.perf_counter() - t0,
    }
    _emit(cfg, result, lines, timing, stdout)
    return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
