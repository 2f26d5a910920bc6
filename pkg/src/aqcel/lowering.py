"""Multi-controlled gate decomposition into paired RCCX ladders, plus the
CX + single-qubit lowerings used for two-qubit gate counting."""
from __future__ import annotations

import itertools
import math
from dataclasses import replace

from .circuit import Circuit, CircuitError, Gate, controlled


class AncillaExhausted(RuntimeError):
    pass


class AncillaPool:
    """Hands out |0> ancillas for decomposition ladders.

    Ancilla-tagged qubits that no gate touches are used first; beyond those,
    fresh qubits are appended to the circuit. ``limit`` caps the number of
    fresh qubits.
    """

    def __init__(self, circuit: Circuit, limit: int | None = None):
        touched = {q for g in circuit.gates for q in g.qubits}
        self.num_qubits = circuit.num_qubits
        self.ancillas = set(circuit.ancillas)
        self._free = sorted(q for q in circuit.ancillas if q not in touched)
        self._fresh = 0
        self.limit = limit

    def acquire(self, k: int) -> list[int]:
        out = []
        while len(out) < k:
            if self._free:
                out.append(self._free.pop(0))
                continue
            if self.limit is not None and self._fresh >= self.limit:
                self._free = out + self._free
                raise AncillaExhausted(f"needed {k} ancillas, pool limit is {self.limit}")
            q = self.num_qubits
            self.num_qubits += 1
            self._fresh += 1
            self.ancillas.add(q)
            out.append(q)
        return out

    def release(self, qubits) -> None:
        self._free = sorted(set(self._free) | set(qubits))


def decompose_multi_controlled(g: Gate, pool: AncillaPool, ids=None) -> list[Gate]:
    """Compute ladder of RCCX gates, a singly-controlled base gate, uncompute ladder.

    Controls are folded left to right: (c0, c1) -> a0, (a0, c2) -> a1, ...
    Each compute RCCX is pair-linked to its mirrored uncompute gate. ``ids``
    is an iterator of fresh gate ids (defaults to 0, 1, 2, ...).
    """
    n = len(g.controls)
    if n < 3:
        raise CircuitError("decompose_multi_controlled needs at least 3 controls")
    ids = itertools.count() if ids is None else ids
    anc = pool.acquire(n - 1)
    compute = []
    left = g.controls[0]
    for i, a in enumerate(anc):
        compute.append(Gate("rccx", (a,), (left, g.controls[i + 1]), gate_id=next(ids)))
        left = a
    core = controlled(g.base_kind, g.params, (anc[-1],), g.target, gate_id=next(ids))
    uncompute = []
    for rung in reversed(compute):
        uid = next(ids)
        uncompute.append(replace(rung, kind="rccxdg", gate_id=uid, pair_link=rung.gate_id))
    links = {u.pair_link: u.gate_id for u in uncompute}
    compute = [replace(r, pair_link=links[r.gate_id]) for r in compute]
    pool.release(anc)
    return compute + [core] + uncompute


def lower_circuit(c: Circuit, limit: int | None = None) -> Circuit:
    """Decompose every gate with three or more controls; others pass through."""
    if not any(len(g.controls) >= 3 for g in c.gates):
        return c
    pool = AncillaPool(c, limit)
    ids = itertools.count(1 + max((g.gate_id or 0) for g in c.gates))
    out: list[Gate] = []
    for g in c.gates:
        if g.gate_id is None:
            g = replace(g, gate_id=next(ids))
        if len(g.controls) >= 3:
            out.extend(decompose_multi_controlled(g, pool, ids))
        else:
            out.append(g)
    return Circuit.from_gates(pool.num_qubits, out, pool.ancillas)


def decompose_controlled_ry(g: Gate) -> list[Gate]:
    """CRy(theta) -> Ry(theta/2), CX, Ry(-theta/2), CX on the target."""
    if g.kind != "cry":
        raise CircuitError(f"expected cry, got {g.kind}")
    (c,), t = g.controls, g.target
    half = g.params[0] / 2
    return [Gate("ry", (t,), (), (half,)), Gate("cx", (t,), (c,)),
            Gate("ry", (t,), (), (-half,)), Gate("cx", (t,), (c,))]


def lower_rccx(g: Gate) -> list[Gate]:
    """Three-CX Margolus circuit; self-inverse, so it also serves RCCXdg."""
    (c1, c2), t = g.controls, g.target
    q = math.pi / 4
    return [Gate("ry", (t,), (), (q,)), Gate("cx", (t,), (c2,)),
            Gate("ry", (t,), (), (q,)), Gate("cx", (t,), (c1,)),
            Gate("ry", (t,), (), (-q,)), Gate("cx", (t,), (c2,)),
            Gate("ry", (t,), (), (-q,))]


def lower_ccx(g: Gate) -> list[Gate]:
    """Standard six-CX Toffoli circuit."""
    (a, b), t = g.controls, g.target

    def one(kind, q):
        return Gate(kind, (q,))

    def cx(c, q):
        return Gate("cx", (q,), (c,))

    return [one("h", t), cx(b, t), one("tdg", t), cx(a, t), one("t", t), cx(b, t),
            one("tdg", t), cx(a, t), one("t", b), one("t", t), one("h", t), cx(a, b),
            one("t", a), one("tdg", b), cx(a, b)]
