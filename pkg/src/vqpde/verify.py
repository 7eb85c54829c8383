"""Self-contained verification oracles, runnable from the CLI.

Every check compares an independent dense/classical computation against the
structured or circuit path and reports the largest observed error.
"""

from __future__ import annotations

import numpy as np

from . import driver, lsbt, simulator
from .fem import BeamProblem, BoundaryCase, assemble, element_stiffness, set_to_zero
from .pauli_ops import (build_structured, decompose_element,
                        materialize_operator, pair_matrix, pauli_matrix)

PAPER_ELEMENT_COEFFS = {"II": 8.0, "IZ": 4.0, "XI": -5.0, "XZ": -7.0,
                        "YY": -6.0, "ZX": 6.0}


def _problem(case: BoundaryCase, n: int) -> BeamProblem:
    return BeamProblem(length=10.0, youngs_modulus=1000.0, second_moment=1.0,
                       num_qubits=n, boundary_case=case)


def check_element_decomposition() -> dict:
    Ke = element_stiffness(1.0, 1.0, 1.0)
    coeffs = dict((label, c) for c, label in decompose_element(Ke))
    err = max(abs(coeffs[k] - v) for k, v in PAPER_ELEMENT_COEFFS.items())
    recon = sum(c * np.real(pauli_matrix(label))
                for label, c in coeffs.items())
    err = max(err, float(np.max(np.abs(recon - Ke))))
    return {"name": "element_decomposition", "passed": err <= 1e-10,
            "max_error": err}


def check_structured_vs_dense(flip_k2_sign: bool = False) -> dict:
    worst = 0.0
    for case in BoundaryCase:
        for n in range(2, 6):
            prob = _problem(case, n)
            bc = prob.bc()
            K_mod, _ = set_to_zero(assemble(prob), bc)
            op = build_structured(prob, bc, flip_k2_sign=flip_k2_sign)
            dense = materialize_operator(op)
            worst = max(worst, float(np.max(np.abs(dense - K_mod))))
    return {"name": "structured_vs_dense", "passed": worst <= 1e-10,
            "max_error": worst}


def check_lsbt_exhaustive(max_n: int = 5) -> dict:
    worst = 0.0
    for n in range(2, max_n + 1):
        N = 2 ** n
        target = np.zeros((N, N))
        target[N - 2, N - 1] = target[N - 1, N - 2] = 1.0
        for p in range(N):
            for q in range(p + 1, N):
                seq = lsbt.derive_sequence(p, q, n)
                if len(seq) > 3 * n:
                    return {"name": "lsbt_exhaustive", "passed": False,
                            "max_error": float("inf")}
                T = lsbt.dense_transform(seq)
                got = T.T @ pair_matrix(p, q, 1.0, N) @ T
                worst = max(worst, float(np.max(np.abs(got - target))))
    return {"name": "lsbt_exhaustive", "passed": worst == 0.0,
            "max_error": worst}


def check_loss_paths(n: int = 4, reps: int = 3, samples: int = 10,
                     seed: int = 1234) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in BoundaryCase:
        ctx = driver.build_context(_problem(case, n), reps)
        for _ in range(samples):
            theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
            quantum = driver.evaluate_loss(theta, ctx)
            dense = driver.evaluate_loss_dense(theta, ctx)
            worst = max(worst,
                        abs(quantum.quad - dense.quad),
                        abs(quantum.overlap - dense.overlap),
                        abs(quantum.loss - dense.loss))
    return {"name": "loss_path_equivalence", "passed": worst <= 1e-9,
            "max_error": worst}


def check_overlap_circuit(n: int = 4, reps: int = 3, samples: int = 10,
                          seed: int = 99) -> dict:
    """Gate-built ancilla superposition circuit vs direct Re<f|phi>."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        theta = rng.uniform(-np.pi, np.pi, n * (reps + 1))
        f = rng.normal(size=2 ** n)
        f /= np.linalg.norm(f)
        gates = simulator.ansatz_gates(n, reps, theta)
        phi = simulator.prepare_ansatz(n, reps, theta)
        via_circuit = simulator.overlap_term(f, phi, phi_gates=gates)
        direct = float(f @ phi.real_vector())
        worst = max(worst, abs(via_circuit - direct))
    return {"name": "overlap_circuit", "passed": worst <= 1e-10,
            "max_error": worst}


def check_energy_identity(n: int = 4, reps: int = 3) -> dict:
    """The loss at the normalized classical solution equals the target energy."""
    worst = 0.0
    for case in BoundaryCase:
        ctx = driver.build_context(_problem(case, n), reps)
        phi = ctx.u_ref / np.linalg.norm(ctx.u_ref)
        quad = float(phi @ ctx.K_mod @ phi)
        overlap = float(ctx.load.vector @ phi)
        loss = -overlap ** 2 / (2 * quad)
        worst = max(worst, abs(loss - ctx.target_energy)
                    / abs(ctx.target_energy))
    return {"name": "energy_identity", "passed": worst <= 1e-9,
            "max_error": worst}


def verify_oracles(deep: bool = False, flip_k2_sign: bool = False) -> dict:
    checks = [
        check_element_decomposition(),
        check_structured_vs_dense(flip_k2_sign=flip_k2_sign),
        check_lsbt_exhaustive(6 if deep else 5),
        check_loss_paths(),
        check_overlap_circuit(),
        check_energy_identity(),
    ]
    return {"checks": checks, "all_passed": all(c["passed"] for c in checks)}
