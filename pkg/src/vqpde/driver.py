"""Variational minimization of the discretized beam energy.

The loss for a trial state phi(theta) is -overlap^2 / (2 quad) with
quad = <phi|K_mod|phi> evaluated from the structured terms plus the
boundary-pair observables, and overlap = <f,phi| X (x) I |f,phi>. The scale
factor c* = overlap/quad is closed-form, so only theta is optimized (BFGS
with central-difference gradients).
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from . import lsbt, simulator
from .fem import (BcSpec, BeamProblem, LoadSpec, assemble, classical_solve,
                  default_load, set_to_zero)
from .pauli_ops import (Prefix, StructuredOperator, build_structured,
                        pauli_matrix)
from .simulator import Statevector


class NearSingularEnergyError(ValueError):
    """The quadratic form collapsed; the trial state sits in the null space."""


class OptimizationFailedError(RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class OptimizerOptions:
    seed: int = 0
    restarts: int = 5
    max_iter: int = 2000
    grad_tol: float = 1e-8
    fd_step: float = 1e-6


@dataclass(frozen=True)
class LossBreakdown:
    quad: float
    overlap: float
    c_star: float
    loss: float


@dataclass
class ConvergenceRecord:
    iterations: int
    loss_history: list[float]
    grad_norm_history: list[float]
    theta_final: np.ndarray
    n_q: int
    function_evals: int
    restart_index: int
    restart_final_losses: list[float]


@dataclass
class SolutionProfile:
    deflections: np.ndarray
    rotations: np.ndarray
    scale: float
    state: np.ndarray  # scaled full DOF vector, physical units


@dataclass
class ProblemContext:
    """Everything assembled once per problem: operators, load, reference."""

    problem: BeamProblem
    bc: BcSpec
    reps: int
    load: LoadSpec
    K: np.ndarray
    K_mod: np.ndarray
    K_bc: np.ndarray
    structured: StructuredOperator
    u_ref: np.ndarray
    target_energy: float

    @property
    def n_qubits(self) -> int:
        return self.problem.num_qubits

    @property
    def n_params(self) -> int:
        return self.n_qubits * (self.reps + 1)

    @property
    def circuits_per_eval(self) -> int:
        # One circuit per structured term, one per bc pair, one overlap circuit.
        return len(self.structured.terms) + len(self.structured.bc_pairs) + 1


def build_context(problem: BeamProblem, reps: int,
                  bc: BcSpec | None = None) -> ProblemContext:
    bc = problem.bc() if bc is None else bc
    load = problem.load if problem.load is not None else default_load(problem, bc)
    if np.linalg.norm(load.vector) == 0.0:
        raise ValueError("load vector must be nonzero")
    K = assemble(problem)
    K_mod, K_bc = set_to_zero(K, bc)
    structured = build_structured(problem, bc)
    u_ref, target_energy = classical_solve(K_mod, load)
    return ProblemContext(problem, bc, reps, load, K, K_mod, K_bc,
                          structured, u_ref, target_energy)


def quad_form_quantum(ctx: ProblemContext, phi: Statevector) -> float:
    """<phi|K_mod|phi> from structured-term and pair-observable circuits."""
    shifted = simulator.shift_by_two(phi)
    total = 0.0
    for term in ctx.structured.terms:
        total += simulator.expectation_structured_term(phi, term, shifted)
    total += lsbt.expectation_kbc(phi, ctx.structured.bc_pairs)
    return total


def evaluate_loss(theta: np.ndarray, ctx: ProblemContext,
                  phi: Statevector | None = None) -> LossBreakdown:
    """Circuit-path loss evaluation (the dense path lives in the oracles)."""
    gates = simulator.ansatz_gates(ctx.n_qubits, ctx.reps, theta)
    if phi is None:
        phi = simulator.apply_circuit(Statevector.zero(ctx.n_qubits), gates)
    quad = quad_form_quantum(ctx, phi)
    if quad <= 1e-12:
        raise NearSingularEnergyError("<phi|K_mod|phi> is numerically zero")
    # The ancilla superposition state is injected from the already prepared
    # phi amplitudes; building it gate by gate is equivalent (the verification
    # suite checks both constructions agree) but roughly 3x slower.
    overlap = simulator.overlap_term(ctx.load.vector, phi)
    c_star = overlap / quad
    loss = -overlap ** 2 / (2.0 * quad)
    return LossBreakdown(quad=quad, overlap=overlap, c_star=c_star, loss=loss)


def evaluate_loss_dense(theta: np.ndarray, ctx: ProblemContext) -> LossBreakdown:
    """Dense-matrix oracle for the loss, independent of the circuit path."""
    phi = simulator.prepare_ansatz(ctx.n_qubits, ctx.reps, theta).real_vector()
    quad = float(phi @ ctx.K_mod @ phi)
    if quad <= 1e-12:
        raise NearSingularEnergyError("<phi|K_mod|phi> is numerically zero")
    overlap = float(ctx.load.vector @ phi)
    return LossBreakdown(quad=quad, overlap=overlap, c_star=overlap / quad,
                         loss=-overlap ** 2 / (2.0 * quad))


@functools.lru_cache(maxsize=None)
def _ansatz_ops(n: int, reps: int) -> tuple:
    """Gate slots of the real-amplitude ansatz: ("ry", qubit, param) | ("cnot", c, t)."""
    ops = [("ry", k, k) for k in range(n)]
    p = n
    for _ in range(reps):
        ops.extend(("cnot", k, k + 1) for k in range(n - 1))
        ops.extend(("ry", k, p + k) for k in range(n))
        p += n
    return tuple(ops)


def _batched_swap(amps: np.ndarray, n: int, target: int, controls=()):
    i0, i1 = simulator._gate_indices(n, target, controls)
    a0 = amps[i0].copy()
    amps[i0] = amps[i1]
    amps[i1] = a0


def batched_losses(thetas: np.ndarray, ctx: ProblemContext) -> np.ndarray:
    """Loss for each row of ``thetas``, one statevector column per row.

    Runs the identical gate sequence and observable reads as the scalar path,
    broadcast across parameter sets; used to amortize finite-difference
    probes.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    B, P = thetas.shape
    n = ctx.n_qubits
    if P != ctx.n_params:
        raise simulator.ArityError(
            f"expected {ctx.n_params} parameters, got {P}")
    N = 2 ** n
    amps = np.zeros((N, B))
    amps[0, :] = 1.0
    for op in _ansatz_ops(n, ctx.reps):
        if op[0] == "ry":
            _, q, pidx = op
            i0, i1 = simulator._gate_indices(n, q, ())
            half = 0.5 * thetas[:, pidx]
            c, s = np.cos(half), np.sin(half)
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = c * a0 - s * a1
            amps[i1] = s * a0 + c * a1
        else:
            _, cq, tq = op
            _batched_swap(amps, n, tq, (cq,))

    shifted = amps.copy()
    for g in simulator.shift_circuit(n - 1):
        _batched_swap(shifted, n, g.target, g.controls)

    # Group the term tails per (prefix, shift); expectation is linear in the
    # observable, so each group needs a single contraction.
    grouped: dict = {}
    for term in ctx.structured.terms:
        key = (term.prefix, term.shift)
        acc = grouped.setdefault(key, np.zeros((4, 4)))
        acc += (term.sign * term.coefficient) * pauli_matrix(term.tail).real
    quad = np.zeros(B)
    for (prefix, shift), tail in grouped.items():
        src = amps if shift == 0 else shifted
        blocks = src.reshape(N // 4, 4, B)
        if prefix is Prefix.ZERO_PROJECTOR:
            blocks = blocks[:1]
        tmp = np.tensordot(tail, blocks, axes=(1, 1))  # (4, G, B)
        quad += np.sum(blocks.transpose(1, 0, 2) * tmp, axis=(0, 1))
    for p, q, coeff in ctx.structured.bc_pairs:
        seq = lsbt.derive_sequence(p, q, n)
        psi = amps.copy()
        for g in lsbt._sim_gates(seq):
            _batched_swap(psi, n, g.target, g.controls)
        quad += coeff * 2.0 * psi[-2, :] * psi[-1, :]

    if np.any(quad <= 1e-12):
        raise NearSingularEnergyError("<phi|K_mod|phi> is numerically zero")
    overlap = ctx.load.vector @ amps
    return -overlap ** 2 / (2.0 * quad)


def gradient(theta: np.ndarray, ctx: ProblemContext,
             h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of the loss (batched probe evaluation)."""
    theta = np.asarray(theta, dtype=float)
    P = theta.size
    probes = np.repeat(theta[None, :], 2 * P, axis=0)
    probes[np.arange(P), np.arange(P)] += h
    probes[P + np.arange(P), np.arange(P)] -= h
    losses = batched_losses(probes, ctx)
    return (losses[:P] - losses[P:]) / (2.0 * h)


def extract_profile(ctx: ProblemContext, breakdown: LossBreakdown,
                    phi: np.ndarray) -> SolutionProfile:
    """Physical solution c* ||f_raw|| phi, sign-gauged toward the load."""
    sign = 1.0 if float(ctx.load.vector @ phi) >= 0.0 else -1.0
    phi = sign * phi
    c_star = sign * breakdown.c_star  # c* flips with phi, the product is fixed
    scale = c_star * ctx.load.scale
    v = scale * phi
    return SolutionProfile(deflections=v[0::2], rotations=v[1::2],
                           scale=scale, state=v)


def optimize(problem: BeamProblem, opts: OptimizerOptions,
             reps: int = 5, bc: BcSpec | None = None,
             ctx: ProblemContext | None = None,
             ) -> tuple[ConvergenceRecord, SolutionProfile, LossBreakdown]:
    """Best-of-restarts BFGS minimization of the reduced loss."""
    if opts.restarts < 1:
        raise ValueError("need at least one restart")
    if ctx is None:
        ctx = build_context(problem, reps, bc)

    rng = np.random.default_rng(opts.seed)
    best = None
    restart_final_losses = []

    for r in range(opts.restarts):
        theta0 = rng.uniform(-np.pi, np.pi, size=ctx.n_params)
        history: list[float] = []
        grad_history: list[float] = []
        last_grad = {"norm": np.nan}
        nfev = 0

        def fun(th):
            nonlocal nfev
            nfev += 1
            return evaluate_loss(th, ctx).loss

        def jac(th):
            g = gradient(th, ctx, opts.fd_step)
            last_grad["norm"] = float(np.max(np.abs(g)))
            return g

        def callback(th):
            history.append(evaluate_loss(th, ctx).loss)
            grad_history.append(last_grad["norm"])

        res = scipy.optimize.minimize(
            fun, theta0, jac=jac, method="BFGS", callback=callback,
            options={"gtol": opts.grad_tol, "maxiter": opts.max_iter})
        restart_final_losses.append(float(res.fun))
        if best is None or res.fun < best["fun"]:
            best = {"fun": float(res.fun), "x": res.x, "nit": int(res.nit),
                    "nfev": nfev, "history": history,
                    "grad_history": grad_history, "restart": r,
                    "success": bool(res.success) or res.nit > 0}

    if best is None or not np.isfinite(best["fun"]):
        raise OptimizationFailedError("all restarts failed", best=best)

    breakdown = evaluate_loss(best["x"], ctx)
    phi = simulator.prepare_ansatz(ctx.n_qubits, ctx.reps,
                                   best["x"]).real_vector()
    profile = extract_profile(ctx, breakdown, phi)
    record = ConvergenceRecord(
        iterations=best["nit"], loss_history=best["history"],
        grad_norm_history=best["grad_history"], theta_final=best["x"],
        n_q=ctx.circuits_per_eval, function_evals=best["nfev"],
        restart_index=best["restart"],
        restart_final_losses=restart_final_losses)
    return record, profile, breakdown
