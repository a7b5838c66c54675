"""Command-line front end: check, solve, simulate, calibrate, apps.

Inputs are the JSON array/gate documents; outputs are JSON reports and CSV
sweep tables under ``--out``.  Exit codes: 0 success (feasible), 2 target
infeasible, 1 malformed input or bad selector.  Every flag has an
environment-variable override prefixed ``DOTGATES_`` (for example
``DOTGATES_SEED``); identical inputs and seed produce byte-identical
outputs.

Run as ``python -m dotgates.cli <subcommand> ...``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import circuits
from .calibrate import (
    CalibrationTarget,
    InfeasibleSchedule,
    accumulated_bond_phases,
    choose_assignments,
    extra_local_phases,
    kspace_path,
    solve_intervals,
    weave_dd,
)
from .gates import (
    GateSpec,
    PhaseVector,
    assert_single_control,
    equiv_up_to_free_phase,
    mqcp_phase_solution,
    solve_dynamics,
    solve_parity,
)
from .model import DotArray, array_from_json
from .simulate import (
    DegenerateSpectrum,
    pulsed_evolution,
    simulate_gate,
    sweep_rows,
)


def _env_default(name: str, fallback):
    value = os.environ.get(f"DOTGATES_{name}")
    return fallback if value is None else value


def _add_common(parser: argparse.ArgumentParser, need_gate: bool = True):
    parser.add_argument("--array", required=True, help="array JSON file")
    if need_gate:
        parser.add_argument("--gate", required=True, help="gate-spec JSON file")
    parser.add_argument("--out", default=_env_default("OUT", "."), help="output directory")
    parser.add_argument("--tol", type=float, default=float(_env_default("TOL", 1e-9)))
    parser.add_argument("--seed", type=int, default=int(_env_default("SEED", 0)))
    parser.add_argument("--jobs", type=int, default=int(_env_default("JOBS", 1)))


def _load_array(path: str) -> DotArray:
    return array_from_json(Path(path).read_text())


def _load_gate(path: str) -> GateSpec:
    return GateSpec.from_json(Path(path).read_text())


def _write(out_dir: str, name: str, text: str) -> str:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text)
    return str(target)


def _gate_free_phase(gate: GateSpec, n_qubits: int, tol: float):
    """Parity solution for the expanded target; None when infeasible."""
    target = gate.expand(n_qubits)
    theta_g = target.reduced()
    solution = solve_parity(theta_g, n_qubits, tol=tol)
    analysis = assert_single_control(theta_g)
    return target, theta_g, solution, analysis


def cmd_check(args) -> int:
    array = _load_array(args.array)
    gate = _load_gate(args.gate)
    if gate.factors is not None and len(gate.factors) > 1:
        # a product of controlled-phase factors is feasible by construction;
        # its corrections are the per-factor closed forms summed
        combined = mqcp_phase_solution(gate.factors[0], array.n_dots)
        for f in gate.factors[1:]:
            combined = combined.combine(mqcp_phase_solution(f, array.n_dots))
        report = {
            "feasible": True,
            "residual": 0.0,
            "second_control": False,
            "degenerate_two_qubit": False,
            "local_phases": [float(x) for x in np.mod(combined.local, 2.0 * np.pi)],
        }
        _write(args.out, "check.json", json.dumps(report, indent=2))
        print("feasible (factored product); local phases:", report["local_phases"])
        return 0
    target, theta_g, solution, analysis = _gate_free_phase(gate, array.n_dots, args.tol)
    report = {
        "feasible": solution.feasible,
        "residual": solution.residual,
        "second_control": analysis.second_control,
        "degenerate_two_qubit": analysis.degenerate_two_qubit,
        "local_phases": list(solution.free.local) if solution.feasible else None,
    }
    _write(args.out, "check.json", json.dumps(report, indent=2))
    if solution.feasible:
        print("feasible; local phases:", report["local_phases"])
        return 0
    print(f"infeasible by parity (residual {solution.residual:.3e})")
    return 2


def cmd_solve(args) -> int:
    array = _load_array(args.array)
    gate = _load_gate(args.gate)
    target, theta_g, solution, analysis = _gate_free_phase(gate, array.n_dots, args.tol)
    if not solution.feasible:
        print(f"infeasible by parity (residual {solution.residual:.3e})")
        return 2
    if gate.factors is not None and len(gate.factors) == 1:
        free = mqcp_phase_solution(gate.factors[0], array.n_dots)
        control = gate.factors[0].control
    else:
        free, control = solution.free, None
    candidates = solve_dynamics(array, free, tau_max=args.tau_max, control=control, tol=args.tol)
    report = {
        "local_phases": list(free.local),
        "mod_pi": [
            {"tau": c.tau, "max_residual": c.max_residual}
            for c in candidates.mod_pi[:10]
        ],
        "mod_2pi": [
            {"tau": c.tau, "max_residual": c.max_residual}
            for c in candidates.mod_2pi[:10]
        ],
    }
    _write(args.out, "solve.json", json.dumps(report, indent=2))
    if not candidates.mod_pi:
        print("no candidate times within tau-max")
        return 2
    best = candidates.best("mod_pi")
    print(f"best tau {best.tau!r} (max per-bond residual {best.max_residual:.3e})")
    return 0


def cmd_simulate(args) -> int:
    array = _load_array(args.array)
    gate = _load_gate(args.gate)
    if args.tau is None:
        _, _, solution, _ = _gate_free_phase(gate, array.n_dots, args.tol)
        if not solution.feasible:
            print("infeasible by parity; pass --tau to simulate anyway")
            return 2
        if gate.factors is None or len(gate.factors) != 1:
            print("automatic time solving needs a single-factor gate; pass --tau")
            return 1
        free = mqcp_phase_solution(gate.factors[0], array.n_dots)
        cands = solve_dynamics(
            array, free, tau_max=args.tau_max, control=gate.factors[0].control, tol=args.tol
        )
        if not cands.mod_pi:
            print("no candidate times within tau-max")
            return 2
        tau = cands.best("mod_pi").tau
    else:
        tau = args.tau
    report = simulate_gate(array, tau)
    target = gate.expand(array.n_dots)
    diag = PhaseVector(np.angle(np.diag(report.u_exact)))
    _, _, equiv_residual = equiv_up_to_free_phase(diag, target, tol=args.tol)
    doc = json.loads(report.to_json())
    doc["tau"] = tau
    doc["equiv_residual_vs_target"] = equiv_residual
    _write(args.out, "simulate.json", json.dumps(doc, indent=2))
    if args.sweep is not None:
        lo, hi, steps = args.sweep.split(":")
        grid = np.geomspace(float(lo), float(hi), int(steps))
        if args.jobs > 1:
            chunks = np.array_split(grid, args.jobs)
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                parts = list(pool.map(lambda g: sweep_rows(array, tau, g), chunks))
            rows = [row for part in parts for row in part]
        else:
            rows = sweep_rows(array, tau, grid)
        lines = ["j_over_eps,infidelity,bound,max_residue"]
        lines += [f"{a!r},{b!r},{c!r},{d!r}" for a, b, c, d in rows]
        _write(args.out, "sweep.csv", "\n".join(lines) + "\n")
    print(f"fidelity {report.fidelity!r}, bound {report.bound!r}")
    return 0


def _per_bond_targets(array: DotArray, gate: GateSpec) -> list[float]:
    """Target phase -theta/2 per bond, matched from the gate factors."""
    if gate.factors is None:
        raise ValueError("calibration needs a factored gate spec")
    wanted = {}
    for f in gate.factors:
        for dot, theta in f.targets:
            key = (min(f.control, dot), max(f.control, dot))
            wanted[key] = np.mod(-0.5 * theta, np.pi)
    phases = []
    for b in array.bonds:
        phases.append(wanted.get((b.j, b.k), 0.0))
    return phases


def cmd_calibrate(args) -> int:
    array = _load_array(args.array)
    gate = _load_gate(args.gate)
    target = CalibrationTarget.for_array(array, _per_bond_targets(array, gate))
    try:
        schedule = solve_intervals(
            array, target, choose_assignments(array), offset_bound=args.offset_bound
        )
    except InfeasibleSchedule as exc:
        print(f"infeasible: {exc}")
        return 2
    _write(args.out, "schedule.json", schedule.to_json())
    path = kspace_path(array, schedule, target, samples_per_stage=8)
    _write(args.out, "kspace.csv", path.to_csv())

    def verify(sched):
        u = pulsed_evolution(array, sched)
        pp = extra_local_phases(sched, array)
        stripped = pp.net.matrix().conj().T @ u
        diag = PhaseVector(np.angle(np.diag(stripped)) - pp.free.expand().values)
        _, _, residual = equiv_up_to_free_phase(diag, gate.expand(array.n_dots), tol=1e-2)
        return residual

    record = {
        "total_time": schedule.total_time,
        "bond_phases_mod_pi": [float(x) for x in np.mod(accumulated_bond_phases(array, schedule), np.pi)],
        "equiv_residual": verify(schedule),
    }
    if args.dd:
        woven = weave_dd(schedule)
        _write(args.out, "schedule_dd.json", woven.to_json())
        record["dd_equiv_residual"] = verify(woven)
        record["dd_total_time"] = woven.total_time
    _write(args.out, "calibrate.json", json.dumps(record, indent=2))
    print(f"schedule with {len(schedule.stages)} stages, total time {schedule.total_time!r}")
    return 0


def cmd_apps(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.which == "logicalz":
        gate = circuits.logical_z_triangle()
        doc = {"diagonal_phases": [float(x) for x in gate.values]}
        _write(args.out, "logicalz.json", json.dumps(doc, indent=2))
    elif args.which == "paritycheck":
        circuit = circuits.parity_check_circuit(args.targets, args.basis)
        outcomes = []
        for _ in range(args.trials):
            dim = 1 << args.targets
            psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            psi /= np.linalg.norm(psi)
            outcome, defect = circuits.check_parity_run(args.targets, args.basis, psi, rng)
            outcomes.append({"outcome": outcome, "defect": defect})
        transcript = {"circuit": circuit.describe(), "runs": outcomes}
        _write(args.out, "paritycheck.json", json.dumps(transcript, indent=2))
    elif args.which == "reversal":
        matrix = circuits.order_reversal(args.n)
        rounded = np.round(matrix.real, 9)
        lines = [",".join(repr(v) for v in row) for row in rounded]
        _write(args.out, f"reversal_{args.n}.csv", "\n".join(lines) + "\n")
    else:
        print(f"unknown selector {args.which!r}")
        return 1
    print(f"wrote {args.which} artifacts to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dotgates", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parity-rule feasibility of a target gate")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="feasibility plus candidate gate times")
    _add_common(p)
    p.add_argument("--tau-max", type=float, default=float(_env_default("TAU_MAX", 1e6)))
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="exact simulation with fidelity accounting")
    _add_common(p)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--tau-max", type=float, default=float(_env_default("TAU_MAX", 1e6)))
    p.add_argument("--sweep", default=None, help="coupling sweep lo:hi:steps")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="pulse schedule defeating bond inhomogeneity")
    _add_common(p)
    p.add_argument("--offset-bound", type=int, default=int(_env_default("OFFSET_BOUND", 8)))
    p.add_argument("--dd", action="store_true", help="also emit the decoupling-woven schedule")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("apps", help="application circuits and transcripts")
    p.add_argument("which", choices=["logicalz", "paritycheck", "reversal"])
    p.add_argument("--targets", type=int, default=2)
    p.add_argument("--basis", choices=["z", "x"], default="z")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--seed", type=int, default=int(_env_default("SEED", 0)))
    p.add_argument("--out", default=_env_default("OUT", "."))
    p.set_defaults(func=cmd_apps)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, ValueError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except DegenerateSpectrum as exc:
        print(f"degenerate spectrum: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
