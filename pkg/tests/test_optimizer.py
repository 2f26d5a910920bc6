import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aqcel.circuit import (Circuit, Gate, controlled, inverse, parse_circuit,
                           two_qubit_count)
from aqcel.optimizer import (OptimizerConfig, baseline, cancel_inverse_pairs, filter_support,
                             optimize, reduce_controls, remove_cx_pairs)
from aqcel.randomcirc import random_circuit
from aqcel.simulator import evolve, hellinger_fidelity, marginal_distribution, unitary

GOLDEN = """qubits 6
ancilla 4 5
ry(0.9) 0
x 1
x 2
ry(1.3) 3
mcu(u3,0.3,0.1,0.2) 0 1 2 ; 3
"""


def overlap(a, b):
    return abs(np.vdot(a.amplitudes, b.amplitudes))


def padded(sv, extra):
    out = np.zeros(1 << (sv.num_qubits + extra), complex)
    out[: 1 << sv.num_qubits] = sv.amplitudes
    return out


# -- inverse-pair cancellation ---------------------------------------------------

def test_adjacent_cx_pair_cancels():
    c = parse_circuit("qubits 2\ncx 0 1\ncx 0 1\n")
    out, n = cancel_inverse_pairs(c)
    assert out.gates == () and n == 1


def test_pair_blocked_by_gate_on_shared_qubit():
    c = parse_circuit("qubits 2\ncx 0 1\nh 1\ncx 0 1\n")
    out, n = cancel_inverse_pairs(c)
    assert len(out.gates) == 3 and n == 0


def test_gate_on_other_qubit_does_not_block():
    c = parse_circuit("qubits 4\nrccx 0 1 2\nh 3\nrccxdg 0 1 2\n")
    out, n = cancel_inverse_pairs(c)
    assert [g.kind for g in out.gates] == ["h"] and n == 1


def test_nested_pairs_cancel_to_fixpoint():
    c = parse_circuit("qubits 3\nry(0.4) 2\ncx 0 1\ncx 0 1\nry(-0.4) 2\nrz(0) 1\n")
    out, n = cancel_inverse_pairs(c)
    assert out.gates == () and n == 2


def test_rccx_with_swapped_controls_does_not_cancel():
    c = parse_circuit("qubits 3\nrccx 0 1 2\nrccxdg 1 0 2\n")
    assert cancel_inverse_pairs(c)[1] == 0


def test_ccx_with_swapped_controls_cancels():
    c = parse_circuit("qubits 3\nccx 0 1 2\nccx 1 0 2\n")
    assert cancel_inverse_pairs(c)[0].gates == ()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_cancellation_preserves_unitary(seed):
    c = random_circuit(seed, num_qubits=4)
    c = c + Circuit.from_gates(4, [inverse(g) for g in reversed(c.gates[-5:])])
    out, _ = cancel_inverse_pairs(c)
    assert np.allclose(unitary(out), unitary(c), atol=1e-10)


# -- support filter and greedy reduction -------------------------------------------

def test_filter_support_threshold():
    d = {"00": 0.5, "01": 0.04, "11": 0.46, "10": 0.0}
    assert set(filter_support(d, 0.0)) == {"00", "01", "11"}
    assert set(filter_support(d, 0.05)) == {"00", "11"}
    assert set(filter_support(d, 0.04)) == {"00", "01", "11"}


def test_reduce_controls_examples():
    assert reduce_controls([0, 1, 2], {"111"}) == []
    assert reduce_controls([0, 1, 2], {"000", "101"}) is None
    assert reduce_controls([0, 1], {"00", "11"}) == [0]
    assert reduce_controls([0, 1], {"00", "01", "10", "11"}) == [0, 1]
    # {111, 100}: qubit 0 is always 1 and qubit 2 follows qubit 1
    assert reduce_controls([0, 1, 2], {"111", "100"}) == [1]
    with pytest.raises(ValueError):
        reduce_controls([0, 1], {"1"})


def _fires(controls_idx, pat):
    return all(pat[i] == "1" for i in controls_idx)


@settings(max_examples=200)
@given(st.integers(1, 4).flatmap(
    lambda n: st.sets(st.text("01", min_size=n, max_size=n), min_size=1)))
def test_reduced_controls_fire_on_same_patterns(support):
    n = len(next(iter(support)))
    controls = list(range(10, 10 + n))
    keep = reduce_controls(controls, support)
    full = {p for p in support if _fires(range(n), p)}
    if keep is None:
        assert not full
        return
    idx = [controls.index(q) for q in keep]
    assert {p for p in support if _fires(idx, p)} == full


# -- CX-pair removal ------------------------------------------------------------------

def _copied_chain():
    # the circuit after control reduction: the ancilla chain copies q0 forward
    gates = [Gate("ry", (0,), (), (0.9,)), Gate("ry", (3,), (), (1.3,)),
             Gate("cx", (4,), (0,)), Gate("cx", (5,), (4,)),
             controlled("u3", (0.3, 0.1, 0.2), (5,), 3),
             Gate("cx", (5,), (4,)), Gate("cx", (4,), (0,))]
    return Circuit.from_gates(6, gates, {4, 5})


def test_cx_chain_collapses_to_single_controlled_u():
    c = _copied_chain()
    zero = {c.gates[2].gate_id, c.gates[3].gate_id}
    out, n = remove_cx_pairs(c, zero)
    assert n == 2
    cu = [g for g in out.gates if g.controls]
    assert len(cu) == 1 and cu[0].controls == (0,) and cu[0].target == 3
    assert np.allclose(evolve(out).amplitudes, evolve(c).amplitudes, atol=1e-12)


def test_cx_pair_needs_zero_target():
    c = _copied_chain()
    out, n = remove_cx_pairs(c, {c.gates[3].gate_id})
    assert n == 1 and two_qubit_count(out).raw == 3


def test_cx_pair_blocked_when_target_written_between():
    c = parse_circuit("qubits 3\ncx 0 1\nx 1\ncx 0 1\n")
    out, n = remove_cx_pairs(c, {c.gates[0].gate_id})
    assert n == 0 and len(out.gates) == 3


def test_cx_pair_with_unused_target_is_removed():
    c = parse_circuit("qubits 3\ncx 0 1\nh 2\ncx 0 1\n")
    out, n = remove_cx_pairs(c, {c.gates[0].gate_id})
    assert n == 1 and [g.kind for g in out.gates] == ["h"]


# -- full pipeline --------------------------------------------------------------------

def test_golden_reduces_to_one_controlled_u():
    c = parse_circuit(GOLDEN)
    out, rep = optimize(c, cfg=OptimizerConfig())
    multi = [g for g in out.gates if len(g.qubits) > 1]
    assert len(multi) == 1
    assert multi[0].controls == (0,) and multi[0].target == 3 and multi[0].base == "u3"
    assert rep.two_qubit_after == 2  # one controlled-U lowers to two CX
    assert rep.cx_pairs_removed == 2
    want = marginal_distribution(evolve(c), range(4))
    got = marginal_distribution(evolve(out), range(4))
    assert hellinger_fidelity(want, got) == pytest.approx(1.0, abs=1e-12)


def test_golden_without_cx_removal_keeps_the_chain():
    out, rep = optimize(parse_circuit(GOLDEN), cfg=OptimizerConfig(cx_pair_removal=False))
    assert rep.cx_pairs_removed == 0
    assert rep.two_qubit_after > 2


def _check_exact(c, cfg):
    out, _ = optimize(c, cfg=cfg)
    want = padded(evolve(c), out.num_qubits - c.num_qubits)
    got = evolve(out).amplitudes
    return abs(np.vdot(want, got))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.booleans(), st.booleans())
def test_threshold_zero_preserves_state(seed, labels, upgrade):
    c = random_circuit(seed)
    cfg = OptimizerConfig(label_manager=labels, bell_upgrade=upgrade)
    assert _check_exact(c, cfg) > 1 - 1e-9


def test_nonzero_input_state():
    c = random_circuit(5, num_qubits=5, num_gates=30)
    for bits in ("10110", "01001"):
        out, _ = optimize(c, bits)
        want = padded(evolve(c, bits), out.num_qubits - 5)
        pad = bits + "0" * (out.num_qubits - 5)
        assert abs(np.vdot(want, evolve(out, pad).amplitudes)) > 1 - 1e-9


def test_bad_initial_rejected():
    with pytest.raises(ValueError):
        optimize(Circuit(2), "012")


def test_deterministic_runs():
    c = random_circuit(11, num_qubits=6, num_gates=40)
    cfg = OptimizerConfig(threshold=0.05, backend="sampled", shots=2000, seed=4)
    a, ra = optimize(c, cfg=cfg)
    b, rb = optimize(c, cfg=cfg)
    assert a.gates == b.gates
    assert ra.to_dict(timing=False) == rb.to_dict(timing=False)


def test_counts_do_not_increase_with_threshold():
    for seed in range(25):
        c = random_circuit(seed, num_qubits=6, num_gates=40)
        prev = None
        for thr in (0.0, 0.05, 0.1, 0.2, 0.4):
            n = optimize(c, cfg=OptimizerConfig(threshold=thr))[1].two_qubit_after
            assert prev is None or n <= prev
            prev = n


def test_optimized_not_worse_than_baseline():
    for seed in range(40):
        c = random_circuit(seed)
        _, rep = optimize(c)
        assert rep.two_qubit_after <= rep.two_qubit_baseline
        assert rep.two_qubit_baseline == two_qubit_count(baseline(c)).lowered


def test_report_and_trace():
    cfg = OptimizerConfig(trace_labels=True)
    out, rep = optimize(parse_circuit(GOLDEN), cfg=cfg)
    d = rep.to_dict(timing=False)
    assert "timing" not in d and d["measurements_performed"] == rep.measurements_performed
    actions = {row["action"] for row in rep.trace}
    assert actions <= {"pass", "label", "measure", "mirror"}
    assert all(len(row["labels"]) == 6 for row in rep.trace)
    assert "trace" not in optimize(parse_circuit(GOLDEN))[1].to_dict()


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(threshold=1.5)
    with pytest.raises(ValueError):
        OptimizerConfig(backend="qpu")
    with pytest.raises(ValueError):
        OptimizerConfig(shots=0)
    assert OptimizerConfig(label_manager=False).remove_cx is False
    assert OptimizerConfig(label_manager=False, cx_pair_removal=True).remove_cx is True


def test_two_copies_of_same_control_pattern():
    # the second three-control gate sees the same controls and is rewritten the same way
    c = parse_circuit("qubits 5\nx 0\nx 1\nh 2\nmcu(x) 0 1 2 ; 3\nmcu(x) 0 1 2 ; 4\n")
    out, rep = optimize(c)
    assert all(len(g.controls) <= 1 for g in out.gates)
    assert overlap(evolve(out), evolve(Circuit.from_gates(out.num_qubits, c.gates))) > 1 - 1e-9


@pytest.mark.parametrize("bits", ["".join(b) for b in itertools.product("01", repeat=3)])
def test_three_control_x_every_basis_input(bits):
    c = parse_circuit("qubits 4\nmcu(x) 0 1 2 ; 3\n")
    out, rep = optimize(c, bits + "0")
    want = "1" if bits == "111" else "0"
    got = evolve(out, bits + "0" + "0" * (out.num_qubits - 4)).bitstrings()
    assert got == [bits + want + "0" * (out.num_qubits - 4)]
    assert rep.two_qubit_after == 0


def test_golden_example_with_zero_controls_deletes_gate():
    c = parse_circuit(GOLDEN.replace("x 1\nx 2\n", ""))
    out, rep = optimize(c)
    assert [g.kind for g in out.gates] == ["ry", "ry"]
    assert rep.two_qubit_after == 0
