"""Seeded random circuits for property tests and soundness sweeps."""
from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit, Gate, controlled

_SINGLE = ("x", "y", "z", "h", "s", "t", "sdg", "ry", "rz", "u3")


def _angles(rng, k):
    return tuple(float(a) for a in rng.uniform(-math.pi, math.pi, size=k))


def random_gate(rng: np.random.Generator, num_qubits: int, max_controls: int = 3) -> Gate:
    """One gate with a random kind; X-type and controlled gates are favoured so
    that circuits keep a lot of classical structure for the optimizer to find."""
    qs = [int(q) for q in rng.permutation(num_qubits)]
    roll = rng.random()
    if roll < 0.25:
        kind = str(rng.choice(_SINGLE))
        n = {"ry": 1, "rz": 1, "u3": 3}.get(kind, 0)
        return Gate(kind, (qs[0],), (), _angles(rng, n))
    if roll < 0.35:
        return Gate("x", (qs[0],))
    k = int(rng.integers(1, min(max_controls, num_qubits - 1) + 1))
    controls, target = qs[:k], qs[k]
    if k == 2 and rng.random() < 0.15:
        return Gate("rccx", (target,), tuple(controls))
    base = str(rng.choice(("x", "x", "x", "z", "h", "ry", "u3")))
    n = {"ry": 1, "u3": 3}.get(base, 0)
    return controlled(base, _angles(rng, n), controls, target)


def random_circuit(seed, num_qubits: int | None = None, num_gates: int | None = None,
                   max_controls: int = 3) -> Circuit:
    rng = np.random.default_rng(seed)
    n = num_qubits if num_qubits is not None else int(rng.integers(3, 7))
    m = num_gates if num_gates is not None else int(rng.integers(1, 41))
    gates = [random_gate(rng, n, max_controls) for _ in range(m)]
    return Circuit.from_gates(n, gates)
