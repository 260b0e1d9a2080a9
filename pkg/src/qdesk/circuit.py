"""Gate vocabulary, circuits, the QFT construction and a brute-force {H, T} compiler."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .statevec import StateVector, _check_unitary, apply_unitary

SQRT2 = np.sqrt(2.0)

_FIXED_1Q = {
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) / SQRT2,
    "T": np.diag([1, np.exp(0.25j * np.pi)]),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.diag([1.0 + 0j, -1.0]),
    "S": np.diag([1.0, 1j]),
}
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)
GATE_KINDS = frozenset({*_FIXED_1Q, "RD", "CNOT", "SWAP", "U"})


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate application.

    ``RD`` on one qubit is diag(1, e^{i pi / 2^d}); on two qubits it is the
    controlled version with ``qubits[0]`` as control. ``U`` carries an explicit
    matrix whose most significant index bit belongs to ``qubits[0]``.
    """

    kind: str
    qubits: tuple[int, ...]
    d: int | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        kind = self.kind
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {kind!r}")
        arity = len(self.qubits)
        if len(set(self.qubits)) != arity or arity == 0:
            raise ValueError(f"{kind} needs distinct qubit indices, got {self.qubits}")
        if kind in _FIXED_1Q and arity != 1:
            raise ValueError(f"{kind} acts on one qubit, got {arity}")
        if kind in ("CNOT", "SWAP") and arity != 2:
            raise ValueError(f"{kind} acts on two qubits, got {arity}")
        if kind == "RD":
            if self.d is None or self.d < 1:
                raise ValueError("RD requires an integer d >= 1")
            if arity not in (1, 2):
                raise ValueError(f"RD acts on one or two qubits, got {arity}")
        if kind == "U":
            if self.matrix is None:
                raise ValueError("generic gate needs a matrix")
            m = np.asarray(self.matrix, dtype=np.complex128)
            if m.shape != (2**arity, 2**arity):
                raise ValueError(f"matrix shape {m.shape} does not match {arity} qubit(s)")
            _check_unitary(m, 1e-10)
            object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.qubits, self.d) != (other.kind, other.qubits, other.d):
            return False
        if self.kind == "U":
            return bool(np.array_equal(self.matrix, other.matrix))
        return True

    def __hash__(self):
        return hash((self.kind, self.qubits, self.d))

    def __repr__(self):
        extra = f", d={self.d}" if self.d is not None else ""
        return f"Gate({self.kind}, {self.qubits}{extra})"


def H(q):
    return Gate("H", (q,))


def T(q):
    return Gate("T", (q,))


def X(q):
    return Gate("X", (q,))


def Z(q):
    return Gate("Z", (q,))


def S(q):
    return Gate("S", (q,))


def CNOT(control, target):
    return Gate("CNOT", (control, target))


def SWAP(a, b):
    return Gate("SWAP", (a, b))


def RD(d, *qubits):
    return Gate("RD", tuple(qubits), d=d)


def unitary_gate(matrix, qubits: Sequence[int]) -> Gate:
    return Gate("U", tuple(qubits), matrix=matrix)


def controlled(u: np.ndarray) -> np.ndarray:
    """|0><0| ⊗ I + |1><1| ⊗ u, control as the most significant bit."""
    u = np.asarray(u, dtype=np.complex128)
    dim = u.shape[0]
    out = np.eye(2 * dim, dtype=np.complex128)
    out[dim:, dim:] = u
    return out


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind in _FIXED_1Q:
        return _FIXED_1Q[g.kind].copy()
    if g.kind == "CNOT":
        return _CNOT.copy()
    if g.kind == "SWAP":
        return _SWAP.copy()
    if g.kind == "RD":
        r = np.diag([1.0, np.exp(1j * np.pi / 2**g.d)])
        return r if len(g.qubits) == 1 else controlled(r)
    return g.matrix.copy()


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ValueError(f"{g} addresses a qubit outside 0..{self.n_qubits - 1}")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: Circuit) -> Circuit:
        n = max(self.n_qubits, other.n_qubits)
        return Circuit(n, self.gates + other.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def on(self, qubit_map: Sequence[int], n_qubits: int) -> Circuit:
        """Relabel qubit q as ``qubit_map[q]`` inside a wider register."""
        gates = [
            Gate(g.kind, tuple(qubit_map[q] for q in g.qubits), d=g.d, matrix=g.matrix)
            for g in self.gates
        ]
        return Circuit(n_qubits, gates)

    def inverse(self) -> Circuit:
        gates = []
        for g in reversed(self.gates):
            if g.kind in ("H", "X", "Y", "Z", "CNOT", "SWAP"):
                gates.append(g)
            else:
                gates.append(unitary_gate(gate_matrix(g).conj().T, g.qubits))
        return Circuit(self.n_qubits, gates)


def execute(c: Circuit, s: StateVector) -> StateVector:
    if c.n_qubits != s.n_qubits:
        raise ValueError(f"circuit has {c.n_qubits} qubits, state has {s.n_qubits}")
    for g in c.gates:
        s = apply_unitary(s, gate_matrix(g), g.qubits, check=False)
    return s


def embed(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of ``u`` acting on ``qubits``; oracle use only."""
    dim = 2**n
    cols = np.eye(dim, dtype=np.complex128)
    # apply u to every basis vector at once by treating columns as a batch
    k = len(qubits)
    axes = [n - 1 - q for q in qubits]
    batch = cols.T.reshape((dim,) + (2,) * n)
    out = np.tensordot(u.reshape((2,) * (2 * k)), batch, axes=(range(k, 2 * k), [a + 1 for a in axes]))
    out = np.moveaxis(out, range(k), [a + 1 for a in axes])
    return out.reshape(dim, dim).T


def circuit_unitary(c: Circuit) -> np.ndarray:
    if c.n_qubits > 10:
        raise ValueError(f"dense circuit unitary limited to 10 qubits, got {c.n_qubits}")
    u = np.eye(2**c.n_qubits, dtype=np.complex128)
    for g in c.gates:
        u = embed(gate_matrix(g), g.qubits, c.n_qubits) @ u
    return u


def qft_circuit(m: int, include_bit_reversal: bool = True) -> Circuit:
    """QFT on qubits 0..m-1 with entries e^{+2 pi i k x / 2^m} / sqrt(2^m).

    Qubit m-1 carries the most significant input bit and is processed first.
    Without the final swaps the output bits come out in reversed order.
    """
    if not 1 <= m <= 10:
        raise ValueError(f"QFT width must be in [1, 10], got {m}")
    gates: list[Gate] = []
    for j in range(m - 1, -1, -1):
        gates.append(H(j))
        for ell in range(j - 1, -1, -1):
            gates.append(RD(j - ell, ell, j))
    if include_bit_reversal:
        for i in range(m // 2):
            gates.append(SWAP(i, m - 1 - i))
    return Circuit(m, gates)


def dft_matrix(m: int) -> np.ndarray:
    N = 2**m
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)


def alphabet_cost(c: Circuit) -> int:
    """Gate count with each SWAP charged as three CNOTs."""
    return sum(3 if g.kind == "SWAP" else 1 for g in c.gates)


# --- text format -----------------------------------------------------------

class CircuitParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_ARITY = {"H": 1, "T": 1, "X": 1, "Y": 1, "Z": 1, "S": 1, "CNOT": 2, "SWAP": 2}


def parse_circuit(text: str, n_qubits: int | None = None) -> Circuit:
    """Parse one-gate-per-line text such as ``H 0`` or ``RD 3 0 1``.

    ``RD d c t`` is the controlled phase with control c; ``RD d q`` is the
    single-qubit phase. Without ``n_qubits`` the register is sized to fit.
    """
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *args = line.split()
        mnemonic = name.upper()
        try:
            nums = [int(a) for a in args]
        except ValueError:
            raise CircuitParseError(lineno, f"non-integer argument in {raw.strip()!r}") from None
        if mnemonic == "RD":
            if len(nums) not in (2, 3):
                raise CircuitParseError(lineno, "RD takes d and one or two qubits")
            d, *qs = nums
            try:
                gates.append(RD(d, *qs))
            except ValueError as exc:
                raise CircuitParseError(lineno, str(exc)) from None
            continue
        if mnemonic not in _ARITY:
            raise CircuitParseError(lineno, f"unknown gate {name!r}")
        if len(nums) != _ARITY[mnemonic]:
            raise CircuitParseError(
                lineno, f"{mnemonic} takes {_ARITY[mnemonic]} qubit(s), got {len(nums)}"
            )
        if any(q < 0 for q in nums):
            raise CircuitParseError(lineno, "negative qubit index")
        try:
            gates.append(Gate(mnemonic, tuple(nums)))
        except ValueError as exc:
            raise CircuitParseError(lineno, str(exc)) from None
    needed = 1 + max((max(g.qubits) for g in gates), default=0)
    if n_qubits is None:
        n_qubits = needed
    elif needed > n_qubits:
        raise ValueError(f"circuit addresses qubit {needed - 1} but only {n_qubits} requested")
    return Circuit(n_qubits, gates)


def format_circuit(c: Circuit) -> str:
    lines = []
    for g in c.gates:
        if g.kind == "U":
            raise ValueError("generic matrix gates have no text form")
        head = f"RD {g.d}" if g.kind == "RD" else g.kind
        lines.append(" ".join([head, *map(str, g.qubits)]))
    return "\n".join(lines) + ("\n" if lines else "")


# --- brute-force single-qubit compiler -------------------------------------

def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of ||u - e^{i phi} v|| in operator norm, for 2x2 unitaries.

    The eigenphases a, b of v^dag u sit an angle theta apart on the circle;
    the best phi bisects them, leaving distance 2 sin(theta / 4).
    """
    w = v.conj().T @ u
    ev = np.linalg.eigvals(w)
    delta = np.angle(ev[0] * np.conj(ev[1]))
    return float(2.0 * np.sin(abs(delta) / 4.0))


@dataclass(frozen=True)
class CompileResult:
    sequence: tuple[str, ...] | None
    distance: float | None
    explored: int

    @property
    def found(self) -> bool:
        return self.sequence is not None


def sequence_matrix(seq: Iterable[str]) -> np.ndarray:
    """Product of a gate sequence, first element applied first."""
    u = np.eye(2, dtype=np.complex128)
    for name in seq:
        u = _FIXED_1Q[name] @ u
    return u


def _fingerprint(u: np.ndarray, grid: float = 1e-6) -> tuple:
    flat = u.ravel()
    ref = next(z for z in flat if abs(z) > 1e-3)
    canon = flat * (abs(ref) / ref)
    return tuple(np.round(np.concatenate([canon.real, canon.imag]) / grid).astype(np.int64))


def compile_1q(target: np.ndarray, eps: float, max_depth: int = 20,
               max_nodes: int = 2_000_000) -> CompileResult:
    """Shortest {H, T} word within ``eps`` of ``target`` up to global phase.

    Breadth-first over words ordered by (length, lexicographic with H < T),
    so the first hit is deterministic. Words producing an already-seen
    unitary (same phase-canonical fingerprint) are pruned, since every
    extension of them is dominated by the earlier representative.
    """
    target = np.asarray(target, dtype=np.complex128)
    _check_unitary(target, 1e-10)
    if eps <= 0:
        raise ValueError("eps must be positive")
    alphabet = ("H", "T")
    identity = np.eye(2, dtype=np.complex128)
    if phase_distance(target, identity) <= eps:
        return CompileResult((), phase_distance(target, identity), 1)
    seen = {_fingerprint(identity)}
    frontier: list[tuple[tuple[str, ...], np.ndarray]] = [((), identity)]
    explored = 1
    for _ in range(max_depth):
        nxt = []
        for seq, u in frontier:
            for name in alphabet:
                v = _FIXED_1Q[name] @ u
                fp = _fingerprint(v)
                if fp in seen:
                    continue
                seen.add(fp)
                explored += 1
                word = seq + (name,)
                dist = phase_distance(target, v)
                if dist <= eps:
                    # re-verify from scratch against accumulated rounding
                    exact = phase_distance(target, sequence_matrix(word))
                    if exact <= eps:
                        return CompileResult(word, exact, explored)
                nxt.append((word, v))
        frontier = nxt
        if not frontier or explored > max_nodes:
            break
    return CompileResult(None, None, explored)
