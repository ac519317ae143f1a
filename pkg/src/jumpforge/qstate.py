"""Dense statevector engine with weighted Pauli-string operators.

Bit-order convention (fixed throughout the package): qubit 0 is the most
significant bit of the basis index, so ``basis_state(2, "10")`` puts the
amplitude at index 2.  Every operator is a sum of at most a few weighted
Pauli-type strings and is applied with O(2^n) strided amplitude passes; no
2^n x 2^n matrix is ever materialised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import math
import numpy as np

from .errors import AnnihilationError, ConfigurationError

NORM_EPS = 1e-14

# Single-qubit factor matrices. SM is the lowering operator |0><1|
# (maps |1> to |0>), SP the raising operator |1><0|.
FACTOR_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "SM": np.array([[0, 1], [0, 0]], dtype=complex),
    "SP": np.array([[0, 0], [1, 0]], dtype=complex),
}


@dataclass
class StateVector:
    """Conditional pure state of an n-qubit register."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.n_qubits < 1:
            raise ConfigurationError(f"need at least one qubit, got {self.n_qubits}")
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise ConfigurationError(
                f"amplitude length {self.amplitudes.shape} does not match "
                f"2^{self.n_qubits}"
            )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def norm(self) -> float:
        a = self.amplitudes
        return math.sqrt(abs(np.vdot(a, a)))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def dump(self) -> str:
        """One "index real imag" line per non-negligible amplitude."""
        lines = []
        for i, a in enumerate(self.amplitudes):
            if abs(a) > NORM_EPS:
                lines.append(f"{i} {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines)


@dataclass(frozen=True)
class PauliTerm:
    """A weighted tensor product of single-qubit factors.

    ``factors`` maps qubit index to one of I, X, Y, Z, SM, SP; qubits not
    listed are acted on by the identity.
    """

    coefficient: complex
    factors: dict[int, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for q, f in self.factors.items():
            if f not in FACTOR_MATRICES:
                raise ConfigurationError(f"unknown factor {f!r} on qubit {q}")
            if q < 0:
                raise ConfigurationError(f"negative qubit index {q}")

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(q for q, f in self.factors.items() if f != "I"))


@dataclass(frozen=True)
class OperatorSum:
    """Sum of weighted Pauli-type strings (length 1 or 2 in practice)."""

    terms: tuple[PauliTerm, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ConfigurationError("operator needs at least one term")

    def support(self) -> tuple[int, ...]:
        qs: set[int] = set()
        for t in self.terms:
            qs.update(t.support())
        return tuple(sorted(qs))

    def scaled(self, c: complex) -> "OperatorSum":
        return OperatorSum(
            tuple(PauliTerm(c * t.coefficient, dict(t.factors)) for t in self.terms)
        )


def pauli_string(coefficient: complex, factors: dict[int, str]) -> OperatorSum:
    return OperatorSum((PauliTerm(coefficient, factors),))


def basis_state(n: int, bits: str) -> StateVector:
    """Computational basis state; qubit 0 is the leftmost (most significant) bit."""
    if n < 1:
        raise ConfigurationError(f"need at least one qubit, got {n}")
    if len(bits) != n or any(b not in "01" for b in bits):
        raise ConfigurationError(f"bitstring {bits!r} does not match {n} qubits")
    amps = np.zeros(2**n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n, amps)


def _apply_factor(tensor: np.ndarray, n: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix to one axis of the [2]*n amplitude tensor."""
    t = np.moveaxis(tensor, qubit, -1)
    t = t @ mat.T
    return np.moveaxis(t, -1, qubit)


def apply_term(state: StateVector, term: PauliTerm) -> np.ndarray:
    n = state.n_qubits
    for q in term.factors:
        if q >= n:
            raise ConfigurationError(f"qubit {q} out of range for {n}-qubit register")
    out = state.amplitudes.reshape([2] * n)
    for q, f in term.factors.items():
        if f == "I":
            continue
        out = _apply_factor(out, n, q, FACTOR_MATRICES[f])
    return term.coefficient * out.reshape(-1)


def apply(state: StateVector, op: OperatorSum) -> StateVector:
    """Return op|psi> unnormalized; input untouched.

    Raises AnnihilationError if the output vector is numerically zero
    (e.g. the lowering operator on the ground state); it is never silently
    renormalized.
    """
    acc = np.zeros(state.dim, dtype=complex)
    for term in op.terms:
        acc += apply_term(state, term)
    if np.linalg.norm(acc) < NORM_EPS:
        raise AnnihilationError("operator annihilated the state")
    return StateVector(state.n_qubits, acc)


def normalize(state: StateVector) -> StateVector:
    nrm = state.norm()
    if nrm < NORM_EPS:
        raise AnnihilationError("cannot normalize a near-zero state")
    return StateVector(state.n_qubits, state.amplitudes / nrm)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized inputs; symmetric, global-phase invariant."""
    if a.n_qubits != b.n_qubits:
        raise ConfigurationError(
            f"register size mismatch: {a.n_qubits} vs {b.n_qubits}"
        )
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def op_matrix(op: OperatorSum, qubits: tuple[int, ...]) -> np.ndarray:
    """Dense matrix of op restricted to the given qubit tuple (test/oracle use).

    ``qubits`` must cover the support of op; ordering follows the tuple with
    the first listed qubit most significant.
    """
    if not set(op.support()) <= set(qubits):
        raise ConfigurationError(f"qubits {qubits} do not cover support {op.support()}")
    dim = 2 ** len(qubits)
    out = np.zeros((dim, dim), dtype=complex)
    for term in op.terms:
        m = np.array([[1.0 + 0j]])
        for q in qubits:
            m = np.kron(m, FACTOR_MATRICES[term.factors.get(q, "I")])
        out += term.coefficient * m
    return out


# Convenience constructors for the operators the detection channels use.

def sigma_minus(q: int, coeff: complex = 1.0) -> OperatorSum:
    return pauli_string(coeff, {q: "SM"})


def sigma_plus(q: int, coeff: complex = 1.0) -> OperatorSum:
    return pauli_string(coeff, {q: "SP"})


def sigma_x(q: int, coeff: complex = 1.0) -> OperatorSum:
    return pauli_string(coeff, {q: "X"})


def sigma_y(q: int, coeff: complex = 1.0) -> OperatorSum:
    return pauli_string(coeff, {q: "Y"})


def sigma_z(q: int, coeff: complex = 1.0) -> OperatorSum:
    return pauli_string(coeff, {q: "Z"})
