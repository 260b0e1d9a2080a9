import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state, random_unitary
from qdesk.circuit import (
    CNOT,
    RD,
    SWAP,
    Circuit,
    CircuitParseError,
    Gate,
    H,
    T,
    X,
    alphabet_cost,
    circuit_unitary,
    compile_1q,
    controlled,
    execute,
    format_circuit,
    gate_matrix,
    parse_circuit,
    phase_distance,
    qft_circuit,
    sequence_matrix,
    unitary_gate,
)
from qdesk.statevec import StateVector, basis_state


def fourier_oracle(m):
    N = 2**m
    out = np.empty((N, N), dtype=complex)
    for k in range(N):
        for x in range(N):
            out[k, x] = complex(math.cos(2 * math.pi * k * x / N), math.sin(2 * math.pi * k * x / N))
    return out / math.sqrt(N)


@pytest.mark.parametrize("m", range(1, 7))
def test_qft_equals_fourier_matrix(m):
    u = circuit_unitary(qft_circuit(m))
    assert np.max(np.abs(u - fourier_oracle(m))) < 1e-10


@pytest.mark.parametrize("m", range(1, 8))
def test_qft_gate_counts(m):
    c = qft_circuit(m)
    assert c.count("H") == m
    assert c.count("RD") == m * (m - 1) // 2
    assert c.count("SWAP") == m // 2


def test_qft_without_reversal_permutes_output_bits():
    m = 4
    u = circuit_unitary(qft_circuit(m, include_bit_reversal=False))
    rev = [int(format(k, "04b")[::-1], 2) for k in range(16)]
    assert np.allclose(u, fourier_oracle(m)[rev])


def test_qft_three_qubits_has_three_h_and_three_rd():
    c = qft_circuit(3, include_bit_reversal=False)
    assert [g.kind for g in c.gates].count("H") == 3
    assert [g.kind for g in c.gates].count("RD") == 3


def test_rd_matrix():
    assert np.allclose(gate_matrix(RD(1, 0)), np.diag([1, 1j]))
    assert np.allclose(gate_matrix(RD(2, 0)), np.diag([1, np.exp(1j * math.pi / 4)]))
    assert np.allclose(gate_matrix(RD(2, 0, 1)), np.diag([1, 1, 1, np.exp(1j * math.pi / 4)]))


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("FOO", (0,))
    with pytest.raises(ValueError):
        CNOT(1, 1)
    with pytest.raises(ValueError):
        Gate("H", (0, 1))
    with pytest.raises(ValueError):
        RD(0, 0)
    with pytest.raises(ValueError):
        unitary_gate(np.ones((2, 2)), (0,))
    with pytest.raises(ValueError):
        Circuit(2, [H(2)])


def test_execute_bell_state():
    s = execute(Circuit(2, [H(0), CNOT(0, 1)]), basis_state(2, 0))
    assert np.allclose(np.abs(s.amplitudes) ** 2, [0.5, 0, 0, 0.5])


gate_strategy = st.one_of(
    st.builds(lambda q: H(q), st.integers(0, 3)),
    st.builds(lambda q: T(q), st.integers(0, 3)),
    st.builds(lambda q: X(q), st.integers(0, 3)),
    st.builds(lambda a, b: CNOT(a, (a + b) % 4), st.integers(0, 3), st.integers(1, 3)),
    st.builds(lambda a, b: SWAP(a, (a + b) % 4), st.integers(0, 3), st.integers(1, 3)),
    st.builds(lambda d, a, b: RD(d, a, (a + b) % 4), st.integers(1, 5), st.integers(0, 3),
              st.integers(1, 3)),
    st.builds(lambda d, a: RD(d, a), st.integers(1, 5), st.integers(0, 3)),
)


@settings(max_examples=60, deadline=None)
@given(gates=st.lists(gate_strategy, max_size=12))
def test_text_round_trip(gates):
    c = Circuit(4, gates)
    assert parse_circuit(format_circuit(c), 4) == c


@settings(max_examples=40, deadline=None)
@given(gates=st.lists(gate_strategy, max_size=12), seed=st.integers(0, 2**32 - 1))
def test_execute_matches_dense_unitary(gates, seed):
    c = Circuit(4, gates)
    psi = StateVector(4, random_state(4, np.random.default_rng(seed)))
    assert np.allclose(execute(c, psi).amplitudes, circuit_unitary(c) @ psi.amplitudes)


@settings(max_examples=40, deadline=None)
@given(gates=st.lists(gate_strategy, max_size=12))
def test_inverse_undoes_circuit(gates):
    c = Circuit(4, gates)
    assert np.allclose(circuit_unitary(c + c.inverse()), np.eye(16))


def test_parse_comments_and_rd_forms():
    c = parse_circuit("# bell\nH 0\n\nCNOT 0 1 # entangle\nRD 2 1\nrd 3 0 1\n")
    assert c.n_qubits == 2
    assert [g.kind for g in c.gates] == ["H", "CNOT", "RD", "RD"]
    assert c.gates[3].qubits == (0, 1) and c.gates[3].d == 3


@pytest.mark.parametrize(
    "text, lineno",
    [("H 0\nFOO 1\n", 2), ("H 0\nH 0 1\n", 2), ("CNOT 0 x\n", 1), ("\n\nRD 2\n", 3),
     ("CNOT 1 1\n", 1), ("H -1\n", 1)],
)
def test_parse_errors_carry_line_numbers(text, lineno):
    with pytest.raises(CircuitParseError) as info:
        parse_circuit(text)
    assert info.value.lineno == lineno
    assert f"line {lineno}" in str(info.value)


def test_parse_qubit_range():
    with pytest.raises(ValueError):
        parse_circuit("CNOT 0 3\n", n_qubits=2)


def test_alphabet_cost_charges_swaps():
    assert alphabet_cost(qft_circuit(4)) == 4 + 6 + 2 * 3


def test_controlled_layout():
    u = random_unitary(2, np.random.default_rng(0))
    c = controlled(u)
    assert np.allclose(c[:2, :2], np.eye(2)) and np.allclose(c[2:, 2:], u)


def brute_force_phase_distance(u, v, grid=20000):
    best = math.inf
    for phi in np.linspace(0, 2 * math.pi, grid, endpoint=False):
        best = min(best, np.linalg.norm(u - np.exp(1j * phi) * v, 2))
    return best


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_phase_distance_matches_phase_scan(seed):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(2, rng), random_unitary(2, rng)
    assert abs(phase_distance(u, v) - brute_force_phase_distance(u, v)) < 1e-3


@given(gamma=st.floats(0, 2 * math.pi), seed=st.integers(0, 2**32 - 1))
def test_phase_distance_ignores_global_phase(gamma, seed):
    u = random_unitary(2, np.random.default_rng(seed))
    assert phase_distance(u, np.exp(1j * gamma) * u) < 1e-7


def test_sequence_matrix_applies_first_element_first():
    h, t = gate_matrix(H(0)), gate_matrix(T(0))
    assert np.allclose(sequence_matrix(("H", "T")), t @ h)


def test_compile_named_targets():
    s = compile_1q(np.diag([1, 1j]), 0.01)
    assert s.sequence == ("T", "T")
    h = compile_1q(gate_matrix(H(0)), 1e-6)
    assert h.sequence == ("H",)
    assert compile_1q(np.eye(2), 0.01).sequence == ()


def test_compile_rotation_within_tolerance():
    a = 0.3
    target = np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    res = compile_1q(target, 0.1)
    assert res.found
    assert phase_distance(target, sequence_matrix(res.sequence)) <= 0.1
    assert set(res.sequence) <= {"H", "T"}


def test_compile_reports_failure():
    target = np.diag([np.exp(-0.5j * 0.3), np.exp(0.5j * 0.3)])
    res = compile_1q(target, 1e-4, max_depth=4)
    assert not res.found and res.distance is None
