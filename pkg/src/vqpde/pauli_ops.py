"""Constant-length structured Pauli representation of the beam stiffness matrix.

The assembled stiffness matrix decomposes into three block-diagonal pieces
built from the 4x4 element matrix: an aligned block diagonal, the same block
diagonal conjugated by the shift-by-2 cyclic permutation, and (for the open
chain) a projector-prefixed correction removing the spurious wraparound block.
Each piece contributes the six element-level Pauli terms, so the term count is
independent of the number of qubits.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fem import BcSpec, BeamProblem, BoundaryCase, assemble, element_stiffness, set_to_zero


class DecompositionResidualError(ValueError):
    """Input 4x4 matrix lies outside the six-term beam family."""


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# The six strings spanning the beam element matrix (leftmost factor = most
# significant qubit).
ELEMENT_BASIS = ("II", "IZ", "XI", "XZ", "YY", "ZX")

ALL_2Q_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")


@functools.lru_cache(maxsize=None)
def pauli_matrix(label: str) -> np.ndarray:
    """Dense matrix of a Pauli string, leftmost factor most significant."""
    out = np.array([[1.0 + 0j]])
    for ch in label:
        out = np.kron(out, _PAULI_1Q[ch])
    out.setflags(write=False)
    return out


class Prefix(str, Enum):
    IDENTITY = "identity"
    ZERO_PROJECTOR = "zero_projector"


@dataclass(frozen=True)
class StructuredTerm:
    """One shift-conjugated, optionally projector-prefixed 2-qubit Pauli term."""

    coefficient: float
    prefix: Prefix
    tail: str          # 2-character Pauli label on the two least significant qubits
    shift: int         # conjugation by the shift-by-`shift` cyclic permutation
    sign: int = 1

    def __post_init__(self):
        if len(self.tail) != 2 or any(c not in "IXYZ" for c in self.tail):
            raise ValueError(f"bad tail label {self.tail!r}")
        if self.shift not in (0, 2):
            raise ValueError("shift must be 0 or 2")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +-1")


@dataclass(frozen=True)
class StructuredOperator:
    """Constant-length term list plus boundary-condition pair corrections."""

    num_qubits: int
    terms: tuple[StructuredTerm, ...]
    bc_pairs: tuple[tuple[int, int, float], ...]


def decompose_element(Ke: np.ndarray) -> list[tuple[float, str]]:
    """Project a beam element matrix onto its six-string Pauli basis.

    Coefficients are Tr(Ke P)/4. Raises if the six terms do not reconstruct
    the input, which means it is outside the beam family.
    """
    Ke = np.asarray(Ke, dtype=float)
    if Ke.shape != (4, 4):
        raise ValueError("element matrix must be 4x4")
    coeffs = []
    recon = np.zeros((4, 4), dtype=complex)
    for label in ELEMENT_BASIS:
        P = pauli_matrix(label)
        c = float(np.real(np.trace(Ke @ P)) / 4.0)
        coeffs.append((c, label))
        recon += c * P
    if np.max(np.abs(recon - Ke)) > 1e-10:
        raise DecompositionResidualError(
            "six-term reconstruction residual exceeds 1e-10")
    return coeffs


def build_structured(problem: BeamProblem, bc: BcSpec, *,
                     flip_k2_sign: bool = False) -> StructuredOperator:
    """Structured representation of the constrained stiffness matrix K_mod.

    Open chain: aligned blocks + shifted blocks - shifted projector-prefixed
    wraparound block (6 terms each, 18 total). Periodic: the wraparound block
    is a real element, so the correction is omitted (12 terms).

    ``flip_k2_sign`` is a debug-only negative control for the verification
    oracles.
    """
    Ke = element_stiffness(problem.youngs_modulus, problem.second_moment,
                           problem.element_length)
    element_terms = decompose_element(Ke)
    k2_sign = 1 if flip_k2_sign else -1

    terms: list[StructuredTerm] = []
    for c, tail in element_terms:
        terms.append(StructuredTerm(c, Prefix.IDENTITY, tail, shift=0))
    for c, tail in element_terms:
        terms.append(StructuredTerm(c, Prefix.IDENTITY, tail, shift=2))
    if problem.boundary_case is not BoundaryCase.PBC:
        for c, tail in element_terms:
            terms.append(StructuredTerm(c, Prefix.ZERO_PROJECTOR, tail,
                                        shift=2, sign=k2_sign))

    K = assemble(problem)
    _, K_bc = set_to_zero(K, bc)
    pairs = []
    N = problem.num_dofs
    for p in range(N):
        for q in range(p + 1, N):
            if K_bc[p, q] != 0.0:
                pairs.append((p, q, float(K_bc[p, q])))
    return StructuredOperator(problem.num_qubits, tuple(terms), tuple(pairs))


def materialize(term: StructuredTerm, n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of one structured term.

    Shift conjugation P^-k A P^k acts on entries as A[(i+k)%N, (j+k)%N].
    """
    if n < 2:
        raise ValueError("need at least 2 qubits")
    N = 2 ** n
    tail = pauli_matrix(term.tail)
    if term.prefix is Prefix.IDENTITY:
        base = np.kron(np.eye(N // 4), tail)
    else:
        prefix = np.zeros((N // 4, N // 4))
        prefix[0, 0] = 1.0
        base = np.kron(prefix, tail)
    idx = (np.arange(N) + term.shift) % N
    shifted = base[np.ix_(idx, idx)]
    out = term.sign * term.coefficient * shifted
    if np.max(np.abs(out.imag)) > 1e-12:
        raise ValueError("materialized term is not real")
    return out.real


def pair_matrix(p: int, q: int, coeff: float, N: int) -> np.ndarray:
    M = np.zeros((N, N))
    M[p, q] = M[q, p] = coeff
    return M


def materialize_operator(op: StructuredOperator) -> np.ndarray:
    """Dense sum of all structured terms and bc pairs (oracle support)."""
    N = 2 ** op.num_qubits
    K = np.zeros((N, N))
    for term in op.terms:
        K += materialize(term, op.num_qubits)
    for p, q, c in op.bc_pairs:
        K += pair_matrix(p, q, c, N)
    return K
