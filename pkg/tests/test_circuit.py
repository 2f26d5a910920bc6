import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqcel.circuit import (Circuit, CircuitError, CircuitSyntaxError, Gate, QubitIndexError,
                           UnsupportedGate, controlled, emit_circuit, inverse, parse_circuit,
                           two_qubit_count)
from aqcel.qps import load_qps
from aqcel.randomcirc import random_circuit
from aqcel.simulator import gate_unitary, unitary


def test_inverse_of_cx_is_cx():
    g = Gate("cx", (1,), (0,))
    assert inverse(g) == g


def test_inverse_of_ry_negates_angle():
    assert inverse(Gate("ry", (2,), (), (0.7,))) == Gate("ry", (2,), (), (-0.7,))


def test_inverse_of_rccx_is_rccxdg_and_composes_to_identity():
    g = Gate("rccx", (2,), (0, 1))
    gi = inverse(g)
    assert gi.kind == "rccxdg" and gi.controls == g.controls and gi.targets == g.targets
    prod = gate_unitary(gi, 3) @ gate_unitary(g, 3)
    assert np.allclose(prod, np.eye(8), atol=1e-12)


def test_unknown_kind_rejected():
    with pytest.raises(UnsupportedGate):
        Gate("swap", (0,), (1,))


@pytest.mark.parametrize("bad", [
    dict(kind="rccx", targets=(2,), controls=(0,)),
    dict(kind="cx", targets=(1,), controls=(0, 2)),
    dict(kind="cx", targets=(0,), controls=(0,)),
    dict(kind="ry", targets=(0,), controls=(), params=()),
])
def test_gate_arity_checked(bad):
    with pytest.raises(CircuitError):
        Gate(**bad)


def test_pair_link_must_be_symmetric():
    a = Gate("rccx", (2,), (0, 1), gate_id=0, pair_link=1)
    b = Gate("rccxdg", (2,), (0, 1), gate_id=1, pair_link=None)
    with pytest.raises(CircuitError):
        Circuit(3, (a, b))


def test_gate_ids_must_increase():
    with pytest.raises(CircuitError):
        Circuit(2, (Gate("x", (0,), gate_id=3), Gate("x", (1,), gate_id=2)))


_KIND_GATES = [
    Gate("x", (0,)), Gate("y", (0,)), Gate("z", (0,)), Gate("h", (0,)), Gate("s", (0,)),
    Gate("sdg", (0,)), Gate("t", (0,)), Gate("tdg", (0,)), Gate("ry", (0,), (), (0.4,)),
    Gate("rz", (0,), (), (-1.1,)), Gate("u3", (0,), (), (0.3, 0.1, 0.2)),
    Gate("cx", (1,), (0,)), Gate("cz", (1,), (0,)), Gate("cry", (1,), (0,), (0.9,)),
    Gate("ccx", (2,), (0, 1)), Gate("rccx", (2,), (0, 1)), Gate("rccxdg", (2,), (1, 0)),
    Gate("mcu", (3,), (0, 1, 2), (0.3, 0.1, 0.2), "u3"),
    Gate("mcu", (3,), (0, 2), (), "t"),
]


@pytest.mark.parametrize("g", _KIND_GATES, ids=lambda g: g.kind + (g.base or ""))
def test_inverse_times_gate_is_identity(g):
    n = max(g.qubits) + 1
    prod = gate_unitary(inverse(g), n) @ gate_unitary(g, n)
    assert np.allclose(prod, np.eye(1 << n), atol=1e-12)


def test_parse_minimal_file():
    c = parse_circuit("qubits 2\ncx 0 1")
    assert c.num_qubits == 2
    assert c.gates == (Gate("cx", (1,), (0,)),)


def test_parse_rotation():
    c = parse_circuit("qubits 4\nry(0.7) 3\n")
    assert c.gates == (Gate("ry", (3,), (), (0.7,)),)


def test_parse_mcu_comments_and_ancillas():
    text = "# header\nqubits 6\nancilla 4 5\nmcu(u3,0.3,0.1,0.2) 0 1 2 ; 3  # trailing\ncry(1.2) 2 3\n"
    c = parse_circuit(text)
    assert c.ancillas == {4, 5}
    assert c.qubit_roles == ("data",) * 4 + ("ancilla",) * 2
    assert c.gates[0] == Gate("mcu", (3,), (0, 1, 2), (0.3, 0.1, 0.2), "u3")
    assert c.gates[1] == Gate("cry", (3,), (2,), (1.2,))


def test_parse_pair_tags():
    c = parse_circuit("qubits 3\nrccx 0 1 2 @p0\nz 0\nrccxdg 0 1 2 @p0\n")
    assert c.gates[0].pair_link == c.gates[2].gate_id
    assert c.gates[2].pair_link == c.gates[0].gate_id
    assert c.gates[1].pair_link is None


@pytest.mark.parametrize("text,line,col", [
    ("qubits 2\ncx 0 x", 2, 6),
    ("cx 0 1", 1, 1),
    ("qubits 2\nry(0.1 0", 2, 1),
    ("qubits 2\nry(abc) 0", 2, 1),
    ("qubits 3\nmcu(x) 0 1 2", 2, 1),
])
def test_syntax_errors_report_position(text, line, col):
    with pytest.raises(CircuitSyntaxError) as info:
        parse_circuit(text)
    assert info.value.line == line
    assert info.value.column == col


def test_qubit_out_of_range():
    with pytest.raises(QubitIndexError):
        parse_circuit("qubits 2\ncx 0 2")


def test_unsupported_gate_in_file():
    with pytest.raises(CircuitSyntaxError):
        parse_circuit("qubits 2\nswap 0 1")


def test_round_trip_shipped_benchmark():
    c = load_qps(2)
    text = emit_circuit(c)
    again = parse_circuit(text)
    assert again.gates == c.gates
    assert emit_circuit(again) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip_random(seed):
    c = random_circuit(seed)
    back = parse_circuit(emit_circuit(c))
    assert back.gates == c.gates
    assert [g.pair_link for g in back.gates] == [g.pair_link for g in c.gates]


def test_round_trip_keeps_pair_links():
    from aqcel.lowering import lower_circuit
    c = lower_circuit(parse_circuit("qubits 5\nmcu(x) 0 1 2 3 ; 4\n"))
    back = parse_circuit(emit_circuit(c))
    assert [g.pair_link for g in back.gates] == [g.pair_link for g in c.gates]
    assert back.ancillas == c.ancillas


def test_two_qubit_count_examples():
    c = Circuit.from_gates(2, [Gate("cx", (1,), (0,)), Gate("ry", (0,), (), (0.2,)),
                               Gate("cx", (1,), (0,))])
    assert two_qubit_count(c).lowered == 2
    assert two_qubit_count(Circuit(2, (Gate("cry", (1,), (0,), (0.3,)),))).lowered == 2
    assert two_qubit_count(Circuit(3, (Gate("rccx", (2,), (0, 1)),))).lowered == 3
    assert two_qubit_count(Circuit(3, (Gate("ccx", (2,), (0, 1)),))).lowered == 6
    assert two_qubit_count(Circuit(3, (Gate("ccx", (2,), (0, 1)),))).raw == 1


def test_mcu_cost_matches_its_ladder():
    from aqcel.lowering import lower_circuit
    for n in (3, 4, 5):
        for base in ("x", "ry", "u3"):
            params = {"x": (), "ry": (0.3,), "u3": (0.1, 0.2, 0.3)}[base]
            c = Circuit(n + 1, (controlled(base, params, range(n), n),))
            assert two_qubit_count(c).lowered == two_qubit_count(lower_circuit(c)).lowered


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_two_qubit_count_additive(s1, s2):
    a, b = random_circuit(s1, num_qubits=5), random_circuit(s2, num_qubits=5)
    total = two_qubit_count(a + b)
    assert total.lowered == two_qubit_count(a).lowered + two_qubit_count(b).lowered
    assert total.raw == two_qubit_count(a).raw + two_qubit_count(b).raw


def test_with_controls_canonicalizes():
    g = Gate("rccx", (2,), (0, 1), gate_id=4)
    assert g.with_controls([0]).kind == "cx"
    assert g.with_controls([]).kind == "x"
    assert g.with_controls([0, 0]).kind == "cx"
    assert g.with_controls([0]).gate_id == 4
    m = Gate("mcu", (3,), (0, 1, 2), (0.5,), "ry")
    assert m.with_controls([1]).kind == "cry"


def test_identity_rotation_detection():
    assert Gate("ry", (0,), (), (1e-13,)).is_identity()
    assert not Gate("ry", (0,), (), (1e-3,)).is_identity()
    assert not Gate("x", (0,)).is_identity()


def test_unitary_of_empty_circuit():
    assert np.allclose(unitary(Circuit(2)), np.eye(4))
    assert math.isclose(abs(np.linalg.det(unitary(Circuit(2)))), 1.0)
