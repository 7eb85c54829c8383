"""Classical FEM layer for the Euler-Bernoulli beam.

Element stiffness, global assembly (open chain and periodic), load vectors,
set-to-zero displacement boundary conditions, and a dense direct solver that
provides reference solutions and target energies.

DOF layout: node i carries deflection at index 2i and rotation at 2i+1.
With n qubits the system has N = 2^n DOFs, i.e. N/2 nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg


class SingularSystemError(ValueError):
    """Raised when the constrained stiffness matrix is not positive definite."""


class BoundaryCase(str, Enum):
    PBC = "pbc"
    SSB = "ssb"
    FFB = "ffb"
    CANTILEVER = "cantilever"


@dataclass(frozen=True)
class BcSpec:
    """Sorted, duplicate-free list of constrained DOF indices."""

    constrained_dofs: tuple[int, ...]

    def __post_init__(self):
        dofs = tuple(self.constrained_dofs)
        if list(dofs) != sorted(set(dofs)):
            raise ValueError("constrained DOFs must be sorted and unique")
        if dofs and dofs[0] < 0:
            raise ValueError("negative DOF index")
        object.__setattr__(self, "constrained_dofs", dofs)

    @staticmethod
    def for_case(case: BoundaryCase, num_dofs: int) -> "BcSpec":
        n = num_dofs
        if case is BoundaryCase.CANTILEVER:
            return BcSpec((0, 1))
        if case is BoundaryCase.SSB:
            return BcSpec((0, n - 2))
        if case is BoundaryCase.FFB:
            return BcSpec((0, 1, n - 2, n - 1))
        # Periodic beam: anchor the node-0 deflection to remove the
        # uniform-translation null mode.
        return BcSpec((0,))


@dataclass(frozen=True)
class BeamProblem:
    """Physical and discretization description of a beam instance."""

    length: float
    youngs_modulus: float
    second_moment: float
    num_qubits: int
    boundary_case: BoundaryCase
    load: "LoadSpec | None" = None

    def __post_init__(self):
        if self.length <= 0 or self.youngs_modulus <= 0 or self.second_moment <= 0:
            raise ValueError("length, E and I must be positive")
        if self.num_qubits < 2:
            raise ValueError("at least 2 qubits required")

    @property
    def num_dofs(self) -> int:
        return 2 ** self.num_qubits

    @property
    def num_nodes(self) -> int:
        return self.num_dofs // 2

    @property
    def num_elements(self) -> int:
        if self.boundary_case is BoundaryCase.PBC:
            return self.num_nodes
        return self.num_nodes - 1

    @property
    def element_length(self) -> float:
        return self.length / self.num_elements

    def bc(self) -> BcSpec:
        return BcSpec.for_case(self.boundary_case, self.num_dofs)


class LoadKind(str, Enum):
    POINT_FORCE = "point_force"
    CUSTOM = "custom"


@dataclass(frozen=True)
class LoadSpec:
    """Unit-norm load vector plus the 2-norm that was removed.

    Entries at constrained DOFs are forced to zero before normalization, so
    ``vector`` is directly compatible with the set-to-zero system. The removed
    norm ``scale`` restores physical units in reported profiles.
    """

    kind: LoadKind
    vector: np.ndarray
    scale: float
    dof_index: int | None = None

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        object.__setattr__(self, "vector", v)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError("load vector must have unit 2-norm")


def normalize_load(raw: np.ndarray, bc: BcSpec,
                   kind: LoadKind = LoadKind.CUSTOM,
                   dof_index: int | None = None) -> LoadSpec:
    f = np.asarray(raw, dtype=float).copy()
    f[list(bc.constrained_dofs)] = 0.0
    norm = float(np.linalg.norm(f))
    if norm == 0.0:
        raise ValueError("load vector vanishes after applying constraints")
    return LoadSpec(kind=kind, vector=f / norm, scale=norm, dof_index=dof_index)


def default_load(problem: BeamProblem, bc: BcSpec) -> LoadSpec:
    """Per-case load convention.

    Cantilever: unit force at the free-end deflection. SSB/FFB: unit force at
    the mid-span deflection. PBC: self-equilibrated +/-1 pair at node 0 and
    node nodes/2 deflections (the anchored entry is zeroed by the constraint).
    """
    n = problem.num_dofs
    raw = np.zeros(n)
    case = problem.boundary_case
    if case is BoundaryCase.CANTILEVER:
        dof = n - 2
        raw[dof] = 1.0
        return normalize_load(raw, bc, LoadKind.POINT_FORCE, dof)
    if case in (BoundaryCase.SSB, BoundaryCase.FFB):
        dof = 2 * (problem.num_nodes // 2)
        raw[dof] = 1.0
        return normalize_load(raw, bc, LoadKind.POINT_FORCE, dof)
    raw[0] = 1.0
    raw[2 * (problem.num_nodes // 2)] = -1.0
    return normalize_load(raw, bc, LoadKind.CUSTOM)


def element_stiffness(E: float, I: float, l_e: float) -> np.ndarray:
    """4x4 Hermite-cubic bending stiffness of one beam element."""
    if E <= 0 or I <= 0 or l_e <= 0:
        raise ValueError("E, I and element length must be positive")
    a = 12.0 * E * I / l_e ** 3
    b = 6.0 * E * I / l_e ** 2
    c = 4.0 * E * I / l_e
    d = 2.0 * E * I / l_e
    return np.array([
        [a, b, -a, b],
        [b, c, -b, d],
        [-a, -b, a, -b],
        [b, d, -b, c],
    ])


def _assemble(problem: BeamProblem, num_elements: int) -> np.ndarray:
    N = problem.num_dofs
    Ke = element_stiffness(problem.youngs_modulus, problem.second_moment,
                           problem.element_length)
    K = np.zeros((N, N))
    for e in range(num_elements):
        dofs = [(2 * e + k) % N for k in range(4)]
        K[np.ix_(dofs, dofs)] += Ke
    return K


def assemble_open(problem: BeamProblem) -> np.ndarray:
    """Open-chain global stiffness: nodes-1 elements at DOF offsets 0,2,4,..."""
    return _assemble(problem, problem.num_nodes - 1)


def assemble_periodic(problem: BeamProblem) -> np.ndarray:
    """Periodic global stiffness: one extra element wrapping the chain."""
    if problem.boundary_case is not BoundaryCase.PBC:
        raise ValueError("periodic assembly requires the PBC boundary case")
    return _assemble(problem, problem.num_nodes)


def assemble(problem: BeamProblem) -> np.ndarray:
    if problem.boundary_case is BoundaryCase.PBC:
        return assemble_periodic(problem)
    return assemble_open(problem)


def set_to_zero(K: np.ndarray, bc: BcSpec) -> tuple[np.ndarray, np.ndarray]:
    """Zero the off-diagonal entries of constrained rows/columns.

    Returns (K_mod, K_bc) with K_bc = K_mod - K; diagonals are untouched.
    """
    K = np.asarray(K, dtype=float)
    K_mod = K.copy()
    for d in bc.constrained_dofs:
        diag = K_mod[d, d]
        K_mod[d, :] = 0.0
        K_mod[:, d] = 0.0
        K_mod[d, d] = diag
    return K_mod, K_mod - K


def classical_solve(K_mod: np.ndarray, load: LoadSpec) -> tuple[np.ndarray, float]:
    """Solve K_mod u = f by Cholesky; return (u, -f.u/2).

    The energy is the minimum of the discretized potential
    0.5 u'Ku - f.u, attained at the solution.
    """
    f = load.vector
    try:
        cho = scipy.linalg.cho_factor(K_mod)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "constrained stiffness matrix is not positive definite "
            "(periodic case without an anchor?)") from exc
    u = scipy.linalg.cho_solve(cho, f)
    energy = -0.5 * float(f @ u)
    return u, energy
