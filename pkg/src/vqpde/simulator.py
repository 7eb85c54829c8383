"""Exact statevector engine.

Gate application, the increment (shift) circuit, the real-amplitude ansatz,
the ancilla-based superposition state used by the overlap observable, and
expectation evaluation for Pauli strings and projector-prefixed tails.

Index convention: qubit 0 is the most significant bit of the basis index,
i = sum_k b_k 2^(m-1-k). The element-matrix tail therefore acts on the two
least significant qubits (m-2, m-1).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .pauli_ops import Prefix, StructuredTerm, pauli_matrix


class ArityError(ValueError):
    """Parameter vector length does not match the ansatz layout."""


@dataclass(frozen=True)
class Gate:
    kind: str                      # "ry" | "x" | "h" | "cnot" | "mcx" | "cry"
    target: int
    controls: tuple[int, ...] = ()
    angle: float = 0.0

    def __post_init__(self):
        if self.target in self.controls:
            raise ValueError("target must not be a control")


def ry(target: int, angle: float) -> Gate:
    return Gate("ry", target, angle=angle)


def x(target: int) -> Gate:
    return Gate("x", target)


def h(target: int) -> Gate:
    return Gate("h", target)


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", target, (control,))


def mcx(controls, target: int) -> Gate:
    return Gate("mcx", target, tuple(controls))


def cry(control: int, target: int, angle: float) -> Gate:
    return Gate("cry", target, (control,), angle)


class Statevector:
    """Complex amplitude vector of length 2^m with in-place gate semantics."""

    def __init__(self, amplitudes: np.ndarray, num_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        m = int(np.log2(amps.size)) if num_qubits is None else num_qubits
        if amps.size != 2 ** m:
            raise ValueError("amplitude count must be a power of two")
        self.amplitudes = amps
        self.num_qubits = m

    @classmethod
    def zero(cls, m: int) -> "Statevector":
        amps = np.zeros(2 ** m, dtype=complex)
        amps[0] = 1.0
        return cls(amps, m)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def real_vector(self) -> np.ndarray:
        if np.max(np.abs(self.amplitudes.imag)) > 1e-10:
            raise ValueError("state has non-negligible imaginary amplitudes")
        return self.amplitudes.real.copy()


@functools.lru_cache(maxsize=None)
def _gate_indices(m: int, target: int, controls: tuple[int, ...]):
    """Index pairs (i0, i1) swapped/mixed by a controlled 1-qubit gate.

    i0 runs over basis states with all control bits set and the target bit
    clear; i1 is i0 with the target bit set.
    """
    t_bit = 1 << (m - 1 - target)
    c_mask = 0
    for c in controls:
        c_mask |= 1 << (m - 1 - c)
    idx = np.arange(2 ** m)
    i0 = idx[((idx & c_mask) == c_mask) & ((idx & t_bit) == 0)]
    i1 = i0 | t_bit
    return i0, i1


_SWAP_KINDS = frozenset(("x", "cnot", "mcx"))
_ROTATION_KINDS = frozenset(("ry", "cry"))
_SQRT_HALF = 1.0 / np.sqrt(2.0)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate in place; controls select the |1> subspace."""
    m = state.num_qubits
    if gate.target >= m:
        raise IndexError("qubit index out of range")
    for c in gate.controls:
        if c >= m:
            raise IndexError("qubit index out of range")
    amps = state.amplitudes
    i0, i1 = _gate_indices(m, gate.target, gate.controls)
    kind = gate.kind
    a0 = amps[i0]          # fancy indexing copies, so a0 survives the writes
    a1 = amps[i1]
    if kind in _SWAP_KINDS:
        amps[i0] = a1
        amps[i1] = a0
    elif kind in _ROTATION_KINDS:
        c = math.cos(0.5 * gate.angle)
        s = math.sin(0.5 * gate.angle)
        amps[i0] = c * a0 - s * a1
        amps[i1] = s * a0 + c * a1
    elif kind == "h":
        amps[i0] = _SQRT_HALF * (a0 + a1)
        amps[i1] = _SQRT_HALF * (a0 - a1)
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    return state


def apply_circuit(state: Statevector, gates) -> Statevector:
    for g in gates:
        apply_gate(state, g)
    return state


def ansatz_gates(n: int, reps: int, theta: np.ndarray) -> list[Gate]:
    """Real-amplitude layout: RY layer, then reps x (linear CNOT chain + RY layer)."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != n * (reps + 1):
        raise ArityError(
            f"expected {n * (reps + 1)} parameters, got {theta.size}")
    gates: list[Gate] = []
    it = iter(theta)
    gates.extend(ry(k, next(it)) for k in range(n))
    for _ in range(reps):
        gates.extend(cnot(k, k + 1) for k in range(n - 1))
        gates.extend(ry(k, next(it)) for k in range(n))
    return gates


def prepare_ansatz(n: int, reps: int, theta: np.ndarray) -> Statevector:
    return apply_circuit(Statevector.zero(n), ansatz_gates(n, reps, theta))


def shift_circuit(m: int) -> list[Gate]:
    """Increment circuit |i> -> |(i+1) mod 2^m>.

    MCX cascade from the most significant target down to a bare X on the
    least significant qubit. Applied to the n-1 most significant qubits of an
    n-qubit register it realizes the shift-by-2 permutation.
    """
    if m < 1:
        raise ValueError("need at least one qubit")
    gates = []
    for t in range(m):
        controls = tuple(range(t + 1, m))
        if controls:
            gates.append(mcx(controls, t))
        else:
            gates.append(x(t))
    return gates


def apply_shift(state: Statevector, times: int = 1) -> Statevector:
    """Apply the full-register increment circuit `times` times."""
    gates = shift_circuit(state.num_qubits)
    for _ in range(times):
        apply_circuit(state, gates)
    return state


def expectation_pauli(state: Statevector, pauli: str,
                      projector_prefix: bool = False) -> float:
    """Exact <state|O|state> for a Pauli string.

    Without a prefix the string must cover the whole register. With
    ``projector_prefix`` the string is a 2-qubit tail and the observable is
    |0><0| on every upper qubit tensor the tail.
    """
    m = state.num_qubits
    amps = state.amplitudes
    if projector_prefix:
        if len(pauli) != 2:
            raise ValueError("projector-prefixed tails act on two qubits")
        tail = pauli_matrix(pauli)
        sub = amps[:4]
        return float(np.real(np.conj(sub) @ tail @ sub))
    if len(pauli) != m:
        raise ValueError("Pauli string length must match the register")
    x_mask = 0
    phase_mask = 0
    n_y = 0
    for k, ch in enumerate(pauli):
        bit = 1 << (m - 1 - k)
        if ch in "XY":
            x_mask |= bit
        if ch in "ZY":
            phase_mask |= bit
        if ch == "Y":
            n_y += 1
    idx = np.arange(amps.size)
    signs = 1 - 2 * (_popcount(idx & phase_mask) & 1)
    out = np.zeros_like(amps)
    out[idx ^ x_mask] = (1j ** n_y) * signs * amps
    val = np.vdot(amps, out)
    if abs(val.imag) > 1e-10:
        raise ValueError("expectation of Hermitian string came out complex")
    return float(val.real)


def _popcount(arr: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(arr)
    v = arr.copy()
    while np.any(v):
        counts += v & 1
        v >>= 1
    return counts


def expectation_tail(state: Statevector, tail: str, prefix: Prefix) -> float:
    """<state | prefix (x) tail | state> with tail on the two LSB qubits."""
    tail_m = pauli_matrix(tail)
    blocks = state.amplitudes.reshape(-1, 4)
    if prefix is Prefix.ZERO_PROJECTOR:
        blocks = blocks[:1]
    val = np.vdot(blocks, blocks @ tail_m.T)
    return float(val.real)


def expectation_structured_term(state: Statevector, term: StructuredTerm,
                                shifted: Statevector | None = None) -> float:
    """Expectation of one structured term via the circuit path.

    ``shifted`` may carry the precomputed shift-by-2 image of ``state`` to
    share it across terms.
    """
    if term.shift == 0:
        target = state
    else:
        if shifted is None:
            shifted = shift_by_two(state)
        target = shifted
    return term.sign * term.coefficient * expectation_tail(
        target, term.tail, term.prefix)


def shift_by_two(state: Statevector) -> Statevector:
    """Shift-by-2 image P^2|state>, via the increment circuit on the upper qubits."""
    n = state.num_qubits
    out = state.copy()
    apply_circuit(out, shift_circuit(n - 1))
    return out


def superposition_state(f: np.ndarray, phi_gates, n: int) -> Statevector:
    """Build (|0>|f> + |1>|phi>)/sqrt(2) on an ancilla-extended register.

    The ancilla is the new most significant qubit. The f branch is written by
    an assumed amplitude-encoding oracle acting on the ancilla-|0> block; the
    phi branch applies ancilla-controlled versions of the ansatz gates.
    """
    f = np.asarray(f, dtype=float)
    if f.size != 2 ** n:
        raise IndexError("force vector length must match the register")
    state = Statevector.zero(n + 1)
    apply_gate(state, h(0))
    # Oracle step: |0>|0..0>/sqrt2 -> |0>|f>/sqrt2.
    state.amplitudes[: f.size] = f / np.sqrt(2)
    for g in phi_gates:
        if g.kind == "ry":
            cg = cry(0, g.target + 1, g.angle)
        elif g.kind == "cnot":
            cg = mcx((0, g.controls[0] + 1), g.target + 1)
        else:
            cg = Gate(g.kind if g.kind != "x" else "cnot", g.target + 1,
                      (0,) + tuple(c + 1 for c in g.controls), g.angle)
        apply_gate(state, cg)
    return state


def overlap_term(f: "Statevector | np.ndarray", phi: Statevector,
                 phi_gates=None) -> float:
    """<f,phi| X (x) I^n |f,phi> = Re<f|phi> via the ancilla construction.

    When ``phi_gates`` is given the phi branch is built by controlled gate
    application; otherwise the branch amplitudes are injected directly.
    """
    f_vec = f.amplitudes.real if isinstance(f, Statevector) else np.asarray(f, dtype=float)
    n = phi.num_qubits
    if f_vec.size != phi.amplitudes.size:
        raise IndexError("state sizes differ")
    if phi_gates is not None:
        state = superposition_state(f_vec, phi_gates, n)
    else:
        amps = np.concatenate([f_vec, phi.amplitudes.real]) / np.sqrt(2)
        state = Statevector(amps.astype(complex), n + 1)
    return expectation_pauli(state, "X" + "I" * n)
