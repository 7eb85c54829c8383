"""Configuration-driven experiment runner.

Subcommands:
  run    --config FILE          one case -> result.json, convergence.csv, profile.csv
  sweep  --config FILE --qubits 3,4,5   same case across qubit counts
  verify [--deep] [--flip-k2-sign]      run the oracle suites

Exit codes: 0 success, 1 optimization failure, 2 config error,
3 verification failure. VQPDE_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import metrics as metrics_mod
from . import verify as verify_mod
from .driver import OptimizerOptions, OptimizationFailedError, build_context, optimize
from .fem import BoundaryCase, BeamProblem, SingularSystemError


class ConfigError(ValueError):
    pass


_PROBLEM_KEYS = {"length", "youngs_modulus", "second_moment", "num_qubits",
                 "boundary_case"}
_ANSATZ_KEYS = {"reps"}
_OPTIMIZER_KEYS = {"seed", "restarts", "max_iter", "grad_tol", "fd_step"}
_TOP_KEYS = {"problem", "ansatz", "optimizer", "output_dir", "mode"}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "config")
    prob = raw.get("problem", {})
    _check_keys(prob, _PROBLEM_KEYS, "problem")
    _check_keys(raw.get("ansatz", {}), _ANSATZ_KEYS, "ansatz")
    _check_keys(raw.get("optimizer", {}), _OPTIMIZER_KEYS, "optimizer")
    if "num_qubits" in prob and prob["num_qubits"] < 3:
        raise ConfigError("CLI-level problems require at least 3 qubits")
    return raw


def problem_from_config(config: dict) -> BeamProblem:
    prob = dict(config.get("problem", {}))
    try:
        case = BoundaryCase(prob.pop("boundary_case", "cantilever").lower())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    defaults = {"length": 10.0, "youngs_modulus": 1000.0,
                "second_moment": 1.0, "num_qubits": 5}
    defaults.update(prob)
    try:
        return BeamProblem(boundary_case=case, **defaults)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def options_from_config(config: dict) -> OptimizerOptions:
    try:
        return OptimizerOptions(**config.get("optimizer", {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def run_case(config: dict, output_dir: str | None = None) -> dict:
    """Execute one configured case and write result files."""
    problem = problem_from_config(config)
    opts = options_from_config(config)
    reps = int(config.get("ansatz", {}).get("reps", 5))
    out = Path(output_dir or config.get("output_dir", "."))

    t0 = time.perf_counter()
    ctx = build_context(problem, reps)
    record, profile, breakdown = optimize(problem, opts, reps=reps, ctx=ctx)
    wall = time.perf_counter() - t0

    u_phys = ctx.load.scale * ctx.u_ref
    report = metrics_mod.build_report(
        target_energy=ctx.target_energy, predicted_energy=breakdown.loss,
        loss_history=record.loss_history,
        deflection_pred=profile.deflections, deflection_ref=u_phys[0::2],
        rotation_pred=profile.rotations, rotation_ref=u_phys[1::2],
        state_pred=profile.state, state_ref=ctx.u_ref)

    result = {
        "config": {
            "problem": {
                "length": problem.length,
                "youngs_modulus": problem.youngs_modulus,
                "second_moment": problem.second_moment,
                "num_qubits": problem.num_qubits,
                "boundary_case": problem.boundary_case.value,
            },
            "ansatz": {"reps": reps},
            "optimizer": dataclasses.asdict(opts),
        },
        "convergence": {
            "iterations": record.iterations,
            "function_evals": record.function_evals,
            "n_q": record.n_q,
            "restart_index": record.restart_index,
            "restart_final_losses": record.restart_final_losses,
            "loss_history": record.loss_history,
            "theta_final": record.theta_final.tolist(),
        },
        "structured_terms": len(ctx.structured.terms),
        "bc_pairs": len(ctx.structured.bc_pairs),
        "target_energy": ctx.target_energy,
        "predicted_energy": breakdown.loss,
        "c_star": breakdown.c_star,
        "solution": {
            "scale": profile.scale,
            "deflections": profile.deflections.tolist(),
            "rotations": profile.rotations.tolist(),
        },
        "metrics": report.to_dict(),
        "wall_time_seconds": wall,
    }

    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "result.json", result)
    _write_convergence(out / "convergence.csv", record)
    _write_profile(out / "profile.csv", ctx, profile, u_phys)
    return result


def _write_json(path: Path, payload: dict):
    try:
        path.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _write_convergence(path: Path, record):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss", "grad_norm"])
        for i, (loss, g) in enumerate(zip(record.loss_history,
                                          record.grad_norm_history)):
            writer.writerow([i, repr(loss), repr(g)])


def _write_profile(path: Path, ctx, profile, u_phys):
    l_e = ctx.problem.element_length
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "x_m", "deflection_pred", "deflection_ref",
                         "rotation_pred", "rotation_ref"])
        for i in range(ctx.problem.num_nodes):
            writer.writerow([i, repr(i * l_e),
                             repr(float(profile.deflections[i])),
                             repr(float(u_phys[2 * i])),
                             repr(float(profile.rotations[i])),
                             repr(float(u_phys[2 * i + 1]))])


def _sweep_worker(args):
    config, n, base_dir = args
    cfg = json.loads(json.dumps(config))
    cfg.setdefault("problem", {})["num_qubits"] = n
    return n, run_case(cfg, output_dir=str(Path(base_dir) / f"n{n}"))


def run_sweep(config: dict, qubits: list[int]) -> list[dict]:
    base_dir = config.get("output_dir", ".")
    jobs = [(config, n, base_dir) for n in qubits]
    max_workers = int(os.environ.get("VQPDE_THREADS", "1"))
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = dict(pool.map(_sweep_worker, jobs))
    else:
        results = dict(map(_sweep_worker, jobs))
    return [results[n] for n in qubits]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vqpde",
        description="Variational quantum solver for FEM beam problems")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured case")
    p_run.add_argument("--config", required=True)

    p_sweep = sub.add_parser("sweep", help="run a case across qubit counts")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--qubits", required=True,
                         help="comma-separated qubit counts, e.g. 3,4,5")

    p_verify = sub.add_parser("verify", help="run the oracle suites")
    p_verify.add_argument("--deep", action="store_true",
                          help="extend exhaustive pair checks to n=6")
    p_verify.add_argument("--flip-k2-sign", action="store_true",
                          help="debug negative control: flip the wraparound "
                               "correction sign")

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            config = load_config(args.config)
            result = run_case(config)
            print(json.dumps(result["metrics"], indent=2))
            return 0
        if args.command == "sweep":
            config = load_config(args.config)
            qubits = [int(s) for s in args.qubits.split(",")]
            if any(n < 3 for n in qubits):
                raise ConfigError("sweep qubit counts must be >= 3")
            results = run_sweep(config, qubits)
            for n, res in zip(qubits, results):
                print(f"n={n}: terms={res['structured_terms']} "
                      f"accuracy={res['metrics']['accuracy_pct']:.4f}%")
            return 0
        # verify
        report = verify_mod.verify_oracles(deep=args.deep,
                                           flip_k2_sign=args.flip_k2_sign)
        for check in report["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"[{status}] {check['name']}: max error {check['max_error']:.3e}")
        return 0 if report["all_passed"] else 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OptimizationFailedError as exc:
        print(f"optimization failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
