"""Phase estimation and Hamiltonian spectroscopy.

Register layout: data qubits occupy indices 0..n_d-1 and the m-bit time
register sits above them, time bit j on qubit n_d + j. Eigenvalues are
written lambda = e^{-2 pi i phi} with phi in [0, 1); the forward QFT on the
time register then maps sum_t lambda^t |t> onto |k> with k / 2^m ~ phi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, H, controlled, execute, qft_circuit, unitary_gate
from .hamsim import PauliHamiltonian, TrotterPlan, exact_propagator, trotter_step_gates
from .statevec import StateVector, basis_state, marginal_probabilities

MAX_WIDTH = 20


class AliasingWarning(UserWarning):
    pass


class NotAnEigenstateWarning(UserWarning):
    pass


class ProjectionFailed(RuntimeError):
    def __init__(self, attempts: int, hits: int, probability: float | None = None):
        self.attempts = attempts
        self.hit_rate = hits / attempts if attempts else 0.0
        self.probability = probability
        super().__init__(
            f"target bin not observed in {attempts} attempts "
            f"(empirical hit rate {self.hit_rate:.4g})"
        )


@dataclass(frozen=True)
class PhaseEstimationConfig:
    m: int
    shots: int = 1000
    T: float = 1.0

    def __post_init__(self):
        if not 1 <= self.m <= 10:
            raise ValueError(f"time register width must be in [1, 10], got {self.m}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.T <= 0:
            raise ValueError("time unit T must be positive")


@dataclass(frozen=True)
class Peak:
    k: int
    phase: float
    weight: float
    energy: float | None = None


@dataclass
class SpectrumHistogram:
    m: int
    counts: np.ndarray
    T: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (2**self.m,):
            raise ValueError(f"expected {2**self.m} bins, got {self.counts.shape}")

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def mode(self) -> int:
        return int(np.argmax(self.counts))

    def peaks(self, min_fraction: float = 0.02) -> list[Peak]:
        """Circular local maxima holding at least ``min_fraction`` of the shots.

        Every bin's count is credited to its circularly nearest peak, so the
        weights sum to one when any peak exists.
        """
        N = 2**self.m
        c = self.counts
        tops = [
            k for k in range(N)
            if c[k] >= min_fraction * self.shots and c[k] > 0
            and c[k] >= c[(k - 1) % N] and c[k] > c[(k + 1) % N]
        ]
        if not tops:
            return []
        weight = dict.fromkeys(tops, 0)
        for k in range(N):
            nearest = min(tops, key=lambda p: (min((k - p) % N, (p - k) % N), p))
            weight[nearest] += int(c[k])
        out = []
        for k in tops:
            phase = k / N
            energy = phase_to_energy(phase, self.T) if self.T else None
            out.append(Peak(k, phase, weight[k] / self.shots, energy))
        return out

    def csv_rows(self):
        N = 2**self.m
        for k in range(N):
            yield k, k / N, int(self.counts[k]), float(self.counts[k] / self.shots)


def phase_to_energy(phase: float, T: float) -> float:
    """Invert phi = frac(E T / 2 pi), taking the representative with |E T| < pi."""
    wrapped = phase - 1.0 if phase >= 0.5 else phase
    return 2 * math.pi * wrapped / T


def energy_bin(energy: float, T: float, m: int) -> int:
    return int(round((energy * T / (2 * math.pi)) % 1.0 * 2**m)) % 2**m


def auto_time_unit(ham: PauliHamiltonian) -> float:
    """T = pi / (2 sum |c_a|): the whole spectrum then sits inside |E T| <= pi / 2."""
    bound = ham.norm_bound()
    if bound == 0:
        return 1.0
    return math.pi / (2 * bound)


def _time_qubits(n_data: int, m: int) -> list[int]:
    return [n_data + j for j in range(m)]


def _readout(n_data: int, m: int) -> Circuit:
    return qft_circuit(m, include_bit_reversal=True).on(_time_qubits(n_data, m), n_data + m)


def phase_estimation_circuit(m: int, u: np.ndarray) -> Circuit:
    """Hadamards, controlled u^(2^j) on time bit j, QFT on the time register."""
    u = np.asarray(u, dtype=np.complex128)
    n_data = int(round(math.log2(u.shape[0])))
    if u.shape != (2**n_data, 2**n_data):
        raise ValueError(f"unitary of shape {u.shape} does not act on whole qubits")
    if n_data + m > MAX_WIDTH:
        raise ValueError(f"data ({n_data}) + time ({m}) qubits exceed {MAX_WIDTH}")
    width = n_data + m
    data = tuple(range(n_data - 1, -1, -1))
    gates = [H(q) for q in _time_qubits(n_data, m)]
    power = u
    for j in range(m):
        gates.append(unitary_gate(controlled(power), (n_data + j,) + data))
        power = power @ power
    return Circuit(width, gates) + _readout(n_data, m)


def _check_eigenstate(u: np.ndarray, psi: StateVector, tol: float = 1e-8) -> None:
    v = u @ psi.amplitudes
    lam = np.vdot(psi.amplitudes, v)
    residual = np.linalg.norm(v - lam * psi.amplitudes)
    if residual > tol:
        warnings.warn(
            f"input is not an eigenvector (residual {residual:.2e}); "
            "the histogram mixes the phases of its eigencomponents",
            NotAnEigenstateWarning,
            stacklevel=3,
        )


def _run_register(circuit: Circuit, psi: StateVector, m: int) -> StateVector:
    return execute(circuit, psi.tensor(basis_state(m, 0)))


def outcome_probabilities(circuit: Circuit, psi: StateVector, m: int) -> np.ndarray:
    """Exact distribution of the time-register readout k."""
    final = _run_register(circuit, psi, m)
    p = marginal_probabilities(final, _time_qubits(psi.n_qubits, m))
    return p / p.sum()


def _sample_histogram(p: np.ndarray, cfg: PhaseEstimationConfig, rng, T=None, **meta):
    counts = rng.multinomial(cfg.shots, p)
    return SpectrumHistogram(cfg.m, counts, T=T, meta=meta)


def estimate_phase(u: np.ndarray, eigenstate: StateVector, cfg: PhaseEstimationConfig,
                   rng: np.random.Generator) -> SpectrumHistogram:
    u = np.asarray(u, dtype=np.complex128)
    _check_eigenstate(u, eigenstate)
    circuit = phase_estimation_circuit(cfg.m, u)
    p = outcome_probabilities(circuit, eigenstate, cfg.m)
    return _sample_histogram(p, cfg, rng)


def hamiltonian_pe_circuit(ham: PauliHamiltonian, cfg: PhaseEstimationConfig,
                           evolution: str = "exact",
                           plan: TrotterPlan | None = None) -> Circuit:
    """Phase estimation of U = e^{-iHT}.

    ``exact`` uses the dense propagator for each controlled power. ``trotter``
    repeats controlled copies of every rotation gate of ``plan``, whose total
    time must equal T; time bit j controls 2^j full plans.
    """
    n, m = ham.n_qubits, cfg.m
    if n + m > MAX_WIDTH:
        raise ValueError(f"data ({n}) + time ({m}) qubits exceed {MAX_WIDTH}")
    spread = ham.norm_bound() * cfg.T
    if spread > math.pi:
        warnings.warn(
            f"spectral width bound 2*{ham.norm_bound():.4g} exceeds 2pi/T; "
            "energies will alias",
            AliasingWarning,
            stacklevel=2,
        )
    if evolution == "exact":
        gates = [H(q) for q in _time_qubits(n, m)]
        data = tuple(range(n - 1, -1, -1))
        for j in range(m):
            power = exact_propagator(ham, cfg.T * 2**j)
            gates.append(unitary_gate(controlled(power), (n + j,) + data))
        return Circuit(n + m, gates) + _readout(n, m)
    if evolution != "trotter":
        raise ValueError(f"unknown evolution mode {evolution!r}")
    if plan is None:
        raise ValueError("trotter mode needs a TrotterPlan")
    if abs(plan.total_time - cfg.T) > 1e-12 * max(1.0, cfg.T):
        raise ValueError(f"plan covers time {plan.total_time}, expected T={cfg.T}")
    step = trotter_step_gates(ham, plan.delta, plan.order(ham))
    gates = [H(q) for q in _time_qubits(n, m)]
    for j in range(m):
        ctrl = n + j
        cstep = [unitary_gate(controlled(g.matrix), (ctrl,) + g.qubits) for g in step]
        gates.extend(cstep * (plan.steps * 2**j))
    return Circuit(n + m, gates) + _readout(n, m)


def spectrum_histogram(ham: PauliHamiltonian, psi: StateVector, cfg: PhaseEstimationConfig,
                       rng: np.random.Generator, evolution: str = "exact",
                       plan: TrotterPlan | None = None) -> SpectrumHistogram:
    if psi.n_qubits != ham.n_qubits:
        raise ValueError(f"state has {psi.n_qubits} qubits, Hamiltonian {ham.n_qubits}")
    circuit = hamiltonian_pe_circuit(ham, cfg, evolution, plan)
    p = outcome_probabilities(circuit, psi, cfg.m)
    return _sample_histogram(p, cfg, rng, T=cfg.T, evolution=evolution)


@dataclass(frozen=True)
class ProjectionResult:
    state: StateVector
    attempts: int
    success_probability: float


def project_by_outcome(ham: PauliHamiltonian, psi: StateVector, cfg: PhaseEstimationConfig,
                       target_k: int, rng: np.random.Generator, evolution: str = "exact",
                       plan: TrotterPlan | None = None,
                       max_attempts: int = 1000) -> ProjectionResult:
    """Repeat phase estimation until the time register reads ``target_k``.

    Each attempt is an independent run of the same circuit, so the readout is
    drawn from the exact marginal; on a hit the data register collapses onto
    the slice of the joint state with time register equal to ``target_k``.
    """
    N = 2**cfg.m
    if not 0 <= target_k < N:
        raise ValueError(f"target bin {target_k} outside [0, {N})")
    circuit = hamiltonian_pe_circuit(ham, cfg, evolution, plan)
    final = _run_register(circuit, psi, cfg.m)
    dim = 2**psi.n_qubits
    joint = final.amplitudes.reshape(N, dim)
    p = np.sum(np.abs(joint) ** 2, axis=1)
    p = p / p.sum()
    for attempt in range(1, max_attempts + 1):
        if int(rng.choice(N, p=p)) == target_k:
            slice_ = joint[target_k]
            state = StateVector(psi.n_qubits, slice_ / np.linalg.norm(slice_))
            return ProjectionResult(state, attempt, float(p[target_k]))
    raise ProjectionFailed(max_attempts, 0, float(p[target_k]))
