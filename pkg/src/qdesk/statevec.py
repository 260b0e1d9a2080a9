"""Dense state vectors for n-qubit pure states.

Basis index convention: qubit 0 is the least significant bit, so the
amplitude of |x_{n-1} ... x_1 x_0> lives at index sum_j x_j 2^j.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-10
UNITARY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> StateVector:
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size != 2**n:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self, other: StateVector) -> StateVector:
        """Return ``other ⊗ self``: ``self`` keeps the low qubit indices."""
        return StateVector(
            self.n_qubits + other.n_qubits, np.kron(other.amplitudes, self.amplitudes)
        )

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


@dataclass(frozen=True)
class MeasurementOutcome:
    bits: str
    collapsed: StateVector

    @property
    def index(self) -> int:
        return int(self.bits, 2)


def _check_qubit_count(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    residual = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if residual > tol:
        raise ValueError(f"matrix is not unitary (residual {residual:.3e})")


def basis_state(n: int, x: str | int) -> StateVector:
    """|x> on n qubits; ``x`` is a bitstring written most significant bit first."""
    _check_qubit_count(n)
    if isinstance(x, str):
        if len(x) != n or set(x) - {"0", "1"}:
            raise ValueError(f"expected a {n}-bit bitstring, got {x!r}")
        index = int(x, 2)
    else:
        index = int(x)
        if not 0 <= index < 2**n:
            raise ValueError(f"basis index {index} out of range for {n} qubits")
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def bloch_state(theta: float, phi: float) -> StateVector:
    if not 0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if not 0 <= phi < 2 * np.pi:
        raise ValueError(f"phi must lie in [0, 2pi), got {phi}")
    amps = np.array(
        [
            np.exp(-0.5j * phi) * np.cos(theta / 2),
            np.exp(0.5j * phi) * np.sin(theta / 2),
        ]
    )
    return StateVector(1, amps)


def apply_unitary(state: StateVector, u: np.ndarray, qubits: Sequence[int],
                  check: bool = True) -> StateVector:
    """Apply a 2^k x 2^k unitary to the listed qubits.

    The matrix is indexed with ``qubits[0]`` as its most significant bit, so a
    CNOT matrix with ``qubits = (c, t)`` uses ``c`` as control. The full
    2^n x 2^n operator is never built: the amplitude array is viewed as an
    n-axis tensor and only the touched axes are contracted.
    """
    u = np.asarray(u, dtype=np.complex128)
    qubits = tuple(int(q) for q in qubits)
    k = len(qubits)
    n = state.n_qubits
    if u.shape != (2**k, 2**k):
        raise ValueError(f"gate of shape {u.shape} does not act on {k} qubit(s)")
    if len(set(qubits)) != k:
        raise ValueError(f"repeated qubit index in {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    if check:
        _check_unitary(u)
    # tensor axis n-1-q holds qubit q
    axes = [n - 1 - q for q in qubits]
    psi = state.amplitudes.reshape((2,) * n)
    out = np.tensordot(u.reshape((2,) * (2 * k)), psi, axes=(range(k, 2 * k), axes))
    out = np.moveaxis(out, range(k), axes)
    return StateVector(n, out.reshape(-1))


def apply_1q(state: StateVector, u: np.ndarray, q: int) -> StateVector:
    return apply_unitary(state, u, (q,))


def apply_2q(state: StateVector, u: np.ndarray, q1: int, q2: int) -> StateVector:
    if q1 == q2:
        raise ValueError("two-qubit gate needs distinct qubits")
    return apply_unitary(state, u, (q1, q2))


def inner_product(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(inner_product(a, b)) ** 2


def equal_up_to_phase(a: StateVector, b: StateVector, tol: float = 1e-9) -> bool:
    return abs(abs(inner_product(a, b)) - 1.0) < tol


def measure_all(state: StateVector, rng: np.random.Generator) -> MeasurementOutcome:
    p = state.probabilities()
    index = int(rng.choice(p.size, p=p / p.sum()))
    bits = format(index, f"0{state.n_qubits}b")
    return MeasurementOutcome(bits, basis_state(state.n_qubits, index))


def sample_counts(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Outcome counts over ``shots`` standard-basis measurements, indexed by x."""
    p = state.probabilities()
    return rng.multinomial(shots, p / p.sum())


def marginal_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Outcome distribution of a subset of qubits; ``qubits[0]`` is the low bit."""
    n = state.n_qubits
    probs = state.probabilities().reshape((2,) * n)
    keep = [n - 1 - q for q in qubits]
    other = tuple(ax for ax in range(n) if ax not in keep)
    marg = probs.sum(axis=other)
    # remaining axes are in increasing tensor-axis order; reorder so that
    # qubits[0] becomes the least significant (last) axis
    remaining = sorted(keep)
    order = [remaining.index(ax) for ax in reversed(keep)]
    return np.transpose(marg, order).reshape(-1)


def helstrom_success(psi0: StateVector, psi1: StateVector, p0: float) -> float:
    """Optimal probability of identifying which of two known pure states was sent."""
    if not 0 <= p0 <= 1:
        raise ValueError(f"prior must lie in [0, 1], got {p0}")
    overlap_sq = abs(inner_product(psi0, psi1)) ** 2
    disc = max(0.0, 1.0 - 4.0 * p0 * (1.0 - p0) * overlap_sq)
    return 0.5 * (1.0 + np.sqrt(disc))
