"""Pauli-string Hamiltonians and first-order product-formula time evolution.

A term c P (P a Pauli string) exponentiates in closed form,
e^{-i c dt P} = cos(c dt) I - i sin(c dt) P, so every Trotter "gate" is exact
and all approximation error comes from the ordering of non-commuting terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .circuit import Gate, embed, unitary_gate
from .statevec import StateVector, apply_unitary

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.diag([1.0 + 0j, -1.0]),
}
DENSE_LIMIT = 12
ERROR_LIMIT = 10


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    paulis: tuple[tuple[int, str], ...]

    def __init__(self, coefficient: float, paulis: Mapping[int, str] | Sequence[tuple[int, str]]):
        items = dict(paulis).items() if isinstance(paulis, Mapping) else paulis
        clean = []
        for q, p in items:
            p = p.upper()
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli {p!r} on qubit {q}")
            clean.append((int(q), p))
        qubits = [q for q, _ in clean]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"qubit repeated in Pauli string {clean}")
        object.__setattr__(self, "coefficient", float(coefficient))
        object.__setattr__(self, "paulis", tuple(sorted(clean)))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.paulis)

    def label(self) -> str:
        return " ".join(f"{p}{q}" for q, p in self.paulis) or "I"

    def local_matrix(self, qubits: Sequence[int] | None = None) -> np.ndarray:
        """Pauli string (without coefficient) on ``qubits``, ``qubits[0]`` most significant."""
        qubits = self.support if qubits is None else tuple(qubits)
        ops = dict(self.paulis)
        missing = set(ops) - set(qubits)
        if missing:
            raise ValueError(f"qubits {sorted(missing)} of the term are not in {qubits}")
        return reduce(np.kron, [PAULI[ops.get(q, "I")] for q in qubits], np.eye(1))

    def commutes_with(self, other: PauliTerm) -> bool:
        a, b = dict(self.paulis), dict(other.paulis)
        clashes = sum(1 for q in set(a) & set(b) if a[q] != b[q])
        return clashes % 2 == 0

    def rotation(self, delta: float) -> np.ndarray:
        """e^{-i c delta P} on the term's support."""
        theta = self.coefficient * delta
        p = self.local_matrix()
        return math.cos(theta) * np.eye(p.shape[0]) - 1j * math.sin(theta) * p


@dataclass(frozen=True)
class PauliHamiltonian:
    """H = sum_a c_a P_a with at most ``k`` qubits per term and |c_a| <= ``h``.

    ``geometry`` optionally places qubits on an integer lattice; every term
    must then fit inside a ball of ``radius`` centred on one of its qubits.
    """

    n_qubits: int
    terms: tuple[PauliTerm, ...]
    k: int | None = None
    h: float | None = None
    geometry: Mapping[int, tuple[int, ...]] | None = field(default=None, compare=False)
    radius: float = 1.0

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if self.n_qubits < 1:
            raise ValueError("Hamiltonian needs at least one qubit")
        if self.k is None:
            object.__setattr__(self, "k", max((len(t.support) for t in terms), default=0))
        if self.h is None:
            object.__setattr__(self, "h", max((abs(t.coefficient) for t in terms), default=0.0))
        for t in terms:
            if t.support and max(t.support) >= self.n_qubits:
                raise ValueError(f"term {t.label()} exceeds {self.n_qubits} qubits")
            if len(t.support) > self.k:
                raise ValueError(f"term {t.label()} acts on more than k={self.k} qubits")
            if abs(t.coefficient) > self.h + 1e-12:
                raise ValueError(f"term {t.label()} has |c| > h={self.h}")
        if self.geometry is not None:
            geom = {int(q): tuple(int(c) for c in np.atleast_1d(x)) for q, x in self.geometry.items()}
            object.__setattr__(self, "geometry", geom)
            for t in terms:
                if not self._fits_ball(t.support):
                    raise ValueError(
                        f"term {t.label()} is not contained in a ball of radius {self.radius}"
                    )

    def _fits_ball(self, support) -> bool:
        pts = []
        for q in support:
            if q not in self.geometry:
                raise ValueError(f"qubit {q} has no lattice coordinate")
            pts.append(np.array(self.geometry[q], dtype=float))
        if len(pts) <= 1:
            return True
        return any(max(np.linalg.norm(p - c) for p in pts) <= self.radius + 1e-12 for c in pts)

    @property
    def M(self) -> int:
        return len(self.terms)

    def norm_bound(self) -> float:
        return sum(abs(t.coefficient) for t in self.terms)


@dataclass(frozen=True)
class TrotterPlan:
    delta: float
    steps: int
    ordering: tuple[int, ...] | None = None

    @property
    def total_time(self) -> float:
        return self.delta * self.steps

    @classmethod
    def for_time(cls, t: float, steps: int, ordering=None) -> TrotterPlan:
        if steps < 0:
            raise ValueError("steps must be non-negative")
        delta = t / steps if steps else 0.0
        return cls(delta, steps, None if ordering is None else tuple(ordering))

    def order(self, ham: PauliHamiltonian) -> tuple[int, ...]:
        if self.ordering is None:
            return tuple(range(ham.M))
        if sorted(self.ordering) != list(range(ham.M)):
            raise ValueError(f"ordering {self.ordering} is not a permutation of {ham.M} terms")
        return self.ordering


# --- dense oracles -----------------------------------------------------------

def ham_matrix(ham: PauliHamiltonian) -> np.ndarray:
    n = ham.n_qubits
    if n > DENSE_LIMIT:
        raise ValueError(f"dense Hamiltonian limited to {DENSE_LIMIT} qubits, got {n}")
    dim = 2**n
    out = np.zeros((dim, dim), dtype=np.complex128)
    for t in ham.terms:
        if not t.support:
            out += t.coefficient * np.eye(dim)
            continue
        out += t.coefficient * embed(t.local_matrix(), t.support, n)
    return out


def exact_propagator(ham: PauliHamiltonian, t: float) -> np.ndarray:
    """e^{-iHt} from the eigendecomposition of the dense Hamiltonian."""
    hmat = ham_matrix(ham)
    try:
        evals, evecs = np.linalg.eigh(hmat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    recon = np.max(np.abs((evecs * evals) @ evecs.conj().T - hmat))
    if recon > 1e-9 * max(1.0, np.max(np.abs(hmat))):
        raise NumericalError(f"eigendecomposition residual {recon:.3e}")
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    unit = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if unit > 1e-9:
        raise NumericalError(f"evolution operator not unitary (residual {unit:.3e})")
    return u


def exact_evolution(ham: PauliHamiltonian, t: float, s: StateVector) -> StateVector:
    if s.n_qubits != ham.n_qubits:
        raise ValueError(f"state has {s.n_qubits} qubits, Hamiltonian {ham.n_qubits}")
    return StateVector(s.n_qubits, exact_propagator(ham, t) @ s.amplitudes)


# --- product formula ---------------------------------------------------------

def trotter_step_gates(ham: PauliHamiltonian, delta: float,
                       ordering: Sequence[int] | None = None) -> list[Gate]:
    if delta <= 0:
        raise ValueError("time step must be positive")
    order = range(ham.M) if ordering is None else ordering
    gates = []
    for a in order:
        term = ham.terms[a]
        if not term.support:
            # identity term: a global phase, kept so the product matches e^{-iHt} exactly
            phase = np.exp(-1j * term.coefficient * delta)
            gates.append(unitary_gate(phase * np.eye(2), (0,)))
            continue
        gates.append(unitary_gate(term.rotation(delta), term.support))
    return gates


def trotter_evolve(ham: PauliHamiltonian, plan: TrotterPlan, s: StateVector) -> StateVector:
    if s.n_qubits != ham.n_qubits:
        raise ValueError(f"state has {s.n_qubits} qubits, Hamiltonian {ham.n_qubits}")
    if plan.steps == 0:
        return s
    step = [(g.matrix, g.qubits) for g in trotter_step_gates(ham, plan.delta, plan.order(ham))]
    for _ in range(plan.steps):
        for u, qubits in step:
            s = apply_unitary(s, u, qubits, check=False)
    return s


def step_unitary(ham: PauliHamiltonian, delta: float, ordering=None) -> np.ndarray:
    """Dense matrix of one product-formula step."""
    n = ham.n_qubits
    u = np.eye(2**n, dtype=np.complex128)
    for g in trotter_step_gates(ham, delta, ordering):
        u = embed(g.matrix, g.qubits, n) @ u
    return u


def trotter_unitary(ham: PauliHamiltonian, plan: TrotterPlan) -> np.ndarray:
    if ham.n_qubits > ERROR_LIMIT:
        raise ValueError(f"dense Trotter unitary limited to {ERROR_LIMIT} qubits")
    if plan.steps == 0:
        return np.eye(2**ham.n_qubits, dtype=np.complex128)
    return np.linalg.matrix_power(step_unitary(ham, plan.delta, plan.order(ham)), plan.steps)


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def operator_error(ham: PauliHamiltonian, plan: TrotterPlan) -> float:
    """||U_trotter(t) - e^{-iHt}|| in operator norm."""
    if ham.n_qubits > ERROR_LIMIT:
        raise ValueError(f"operator error oracle limited to {ERROR_LIMIT} qubits")
    exact = exact_propagator(ham, plan.total_time)
    return spectral_norm(trotter_unitary(ham, plan) - exact)


def single_step_error(ham: PauliHamiltonian, delta: float) -> float:
    return operator_error(ham, TrotterPlan(delta, 1))


def step_size_for(delta_target_error: float, ham: PauliHamiltonian, t: float,
                  constant: float = 1.0) -> TrotterPlan:
    """Plan with Delta = err / (C h^2 M t), rounded so that steps * Delta = t."""
    if delta_target_error <= 0 or t <= 0 or constant <= 0:
        raise ValueError("error target, time and constant must be positive")
    if ham.M == 0 or ham.h == 0:
        return TrotterPlan(t, 1)
    delta = delta_target_error / (constant * ham.h**2 * ham.M * t)
    # guard against ceil(3.0000000000000004) style overshoot
    steps = max(1, math.ceil(t / delta - 1e-9))
    return TrotterPlan(t / steps, steps)


def gate_count(ham: PauliHamiltonian, plan: TrotterPlan) -> int:
    return ham.M * plan.steps


def commutator_bound(ham: PauliHamiltonian) -> float:
    """1/2 sum_{a<b} ||[H_a, H_b]||, each pair evaluated on its joint support only."""
    total = 0.0
    terms = ham.terms
    for a in range(len(terms)):
        for b in range(a + 1, len(terms)):
            ta, tb = terms[a], terms[b]
            joint = sorted(set(ta.support) | set(tb.support))
            if not set(ta.support) & set(tb.support):
                continue
            ma = ta.coefficient * ta.local_matrix(joint)
            mb = tb.coefficient * tb.local_matrix(joint)
            total += spectral_norm(ma @ mb - mb @ ma)
    return 0.5 * total


def leading_error_norm(ham: PauliHamiltonian) -> float:
    """|| 1/2 sum_{a<b} [H_a, H_b] || on the full space (dense)."""
    n = ham.n_qubits
    mats = [t.coefficient * embed(t.local_matrix(), t.support, n) for t in ham.terms if t.support]
    acc = np.zeros((2**n, 2**n), dtype=np.complex128)
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            acc += mats[a] @ mats[b] - mats[b] @ mats[a]
    return 0.5 * spectral_norm(acc)


def noncommuting_pairs(ham: PauliHamiltonian) -> int:
    terms = ham.terms
    return sum(
        1
        for a in range(len(terms))
        for b in range(a + 1, len(terms))
        if not terms[a].commutes_with(terms[b])
    )


# --- model Hamiltonians ------------------------------------------------------

def ising_chain(n: int, coupling: float = 1.0, field_strength: float = 1.0) -> PauliHamiltonian:
    """sum_i J Z_i Z_{i+1} + sum_i g X_i on an open chain with unit spacing."""
    terms = [PauliTerm(coupling, {i: "Z", i + 1: "Z"}) for i in range(n - 1)]
    terms += [PauliTerm(field_strength, {i: "X"}) for i in range(n)]
    return PauliHamiltonian(n, tuple(terms), geometry={i: (i,) for i in range(n)})


# --- text format -------------------------------------------------------------

class HamiltonianParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def parse_hamiltonian(text: str) -> PauliHamiltonian:
    """Read ``n <int> k <int> h <float>`` then ``<coeff> <P><q> ...`` lines.

    ``geom <q> <coord>`` lines give lattice coordinates (comma-separated for
    D > 1) and ``radius <float>`` overrides the locality radius.
    """
    header = None
    terms = []
    geometry: dict[int, tuple[int, ...]] = {}
    radius = 1.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        try:
            if head == "n":
                fields = dict(zip(tokens[0::2], tokens[1::2]))
                header = (int(fields["n"]), int(fields["k"]), float(fields["h"]))
            elif head == "geom":
                geometry[int(tokens[1])] = tuple(int(c) for c in tokens[2].split(","))
            elif head == "radius":
                radius = float(tokens[1])
            else:
                coeff = float(tokens[0])
                ops = {}
                for tok in tokens[1:]:
                    p, q = tok[0].upper(), int(tok[1:])
                    if p not in "XYZ" or q in ops:
                        raise ValueError(f"bad Pauli factor {tok!r}")
                    ops[q] = p
                terms.append(PauliTerm(coeff, ops))
        except (KeyError, IndexError, ValueError) as exc:
            raise HamiltonianParseError(lineno, f"cannot parse {raw.strip()!r}: {exc}") from None
    if header is None:
        raise HamiltonianParseError(0, "missing 'n <int> k <int> h <float>' header")
    n, k, h = header
    return PauliHamiltonian(n, tuple(terms), k=k, h=h,
                            geometry=geometry or None, radius=radius)


def format_hamiltonian(ham: PauliHamiltonian) -> str:
    lines = [f"n {ham.n_qubits} k {ham.k} h {ham.h!r}"]
    for t in ham.terms:
        factors = f" {t.label()}" if t.support else ""
        lines.append(f"{t.coefficient!r}{factors}")
    if ham.geometry:
        lines.append(f"radius {ham.radius!r}")
        for q in sorted(ham.geometry):
            lines.append(f"geom {q} {','.join(map(str, ham.geometry[q]))}")
    return "\n".join(lines) + "\n"
