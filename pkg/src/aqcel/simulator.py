"""Exact statevector evolution, marginals, seeded shot sampling and Hellinger fidelity.

The state is stored sparsely: a sorted array of basis indices with nonzero
amplitude plus the matching amplitudes. Bit ``i`` of a basis index is qubit
``i``; printed bitstrings put qubit 0 leftmost. Circuits built from a fixed
basis input (the parton-shower benchmarks, for instance) touch only a small
fraction of the 2^n basis states, so 30+ qubit circuits stay cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .circuit import Circuit, Gate

Distribution = dict[str, float]

AMP_ATOL = 1e-13   # amplitudes below this are treated as exact zeros
PROB_ATOL = 1e-15  # dropped from exact distributions
NORM_ATOL = 1e-10
MAX_QUBITS = 62
MAX_DENSE_QUBITS = 26

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
}


def single_qubit_matrix(base: str, params: Sequence[float] = ()) -> np.ndarray:
    if base in _FIXED:
        return _FIXED[base]
    if base == "ry":
        c, s = math.cos(params[0] / 2), math.sin(params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if base == "rz":
        t = params[0] / 2
        return np.diag([np.exp(-1j * t), np.exp(1j * t)])
    if base == "u3":
        theta, phi, lam = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -np.exp(1j * lam) * s],
                         [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]])
    raise ValueError(f"no matrix for {base!r}")


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        index = sum(1 << q for q, b in enumerate(bits) if b == "1")
        return cls(len(bits), np.array([index], dtype=np.int64), np.array([1.0 + 0j]))

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex]) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(len(amps)))) if len(amps) else 0
        if len(amps) == 0 or 1 << n != len(amps):
            raise ValueError("amplitude list length must be a power of two")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1) > NORM_ATOL:
            raise ValueError(f"initial state is not normalized (norm {norm})")
        nz = np.flatnonzero(np.abs(amps) > AMP_ATOL)
        return cls(n, nz.astype(np.int64), amps[nz])

    @property
    def amplitudes(self) -> np.ndarray:
        """Dense amplitude vector (only for modest qubit counts)."""
        if self.num_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"{self.num_qubits} qubits is too many for a dense vector")
        out = np.zeros(1 << self.num_qubits, dtype=complex)
        out[self.indices] = self.values
        return out

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def bitstrings(self) -> list[str]:
        return [format_index(int(i), self.num_qubits) for i in self.indices]


def format_index(index: int, num_qubits: int) -> str:
    return "".join("1" if index >> q & 1 else "0" for q in range(num_qubits))


def _mask(qubits: Sequence[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _apply(sv: StateVector, controls: Sequence[int], target: int, u: np.ndarray) -> StateVector:
    idx, amp = sv.indices, sv.values
    cm = _mask(controls)
    sel = (idx & cm) == cm
    if not sel.any():
        return sv
    tb = np.int64(1 << target)
    sidx, samp = idx[sel], amp[sel]
    bit = (sidx & tb) != 0
    if u[0, 1] == 0 and u[1, 0] == 0:
        values = amp.copy()
        values[sel] = samp * np.where(bit, u[1, 1], u[0, 0])
        return StateVector(sv.num_qubits, idx, values)
    if u[0, 0] == 0 and u[1, 1] == 0:
        new_idx = sidx ^ tb
        new_amp = samp * np.where(bit, u[0, 1], u[1, 0])
    else:
        base, inv = np.unique(sidx & ~tb, return_inverse=True)
        a0 = np.zeros(len(base), dtype=complex)
        a1 = np.zeros(len(base), dtype=complex)
        a0[inv[~bit]] = samp[~bit]
        a1[inv[bit]] = samp[bit]
        n0 = u[0, 0] * a0 + u[0, 1] * a1
        n1 = u[1, 0] * a0 + u[1, 1] * a1
        new_idx = np.concatenate([base, base | tb])
        new_amp = np.concatenate([n0, n1])
        keep = np.abs(new_amp) > AMP_ATOL
        new_idx, new_amp = new_idx[keep], new_amp[keep]
    all_idx = np.concatenate([idx[~sel], new_idx])
    all_amp = np.concatenate([amp[~sel], new_amp])
    order = np.argsort(all_idx, kind="stable")
    return StateVector(sv.num_qubits, all_idx[order], all_amp[order])


def _phase(sv: StateVector, ones: Sequence[int], zeros: Sequence[int], phase: complex) -> StateVector:
    om, zm = _mask(ones), _mask(zeros)
    sel = ((sv.indices & om) == om) & ((sv.indices & zm) == 0)
    if not sel.any():
        return sv
    values = sv.values.copy()
    values[sel] *= phase
    return StateVector(sv.num_qubits, sv.indices, values)


def apply_gate(sv: StateVector, g: Gate) -> StateVector:
    """Apply one gate; the base unitary acts where every control is 1."""
    u = single_qubit_matrix(g.base_kind, g.params)
    out = _apply(sv, g.controls, g.target, u)
    if g.is_rccx:
        # Margolus convention: CCX times a -1 phase on |c1 c2 t> = |1 0 1>
        c1, c2 = g.controls
        out = _phase(out, (c1, g.target), (c2,), -1.0)
    return out


def initial_state(num_qubits: int, initial) -> StateVector:
    if isinstance(initial, StateVector):
        sv = initial
    elif isinstance(initial, str):
        sv = StateVector.basis(initial)
    else:
        sv = StateVector.from_amplitudes(initial)
    if sv.num_qubits != num_qubits:
        raise ValueError(f"initial state has {sv.num_qubits} qubits, circuit has {num_qubits}")
    return sv


def evolve(c: Circuit, initial=None) -> StateVector:
    """Statevector after running ``c`` on a basis bitstring or amplitude list."""
    if c.num_qubits > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits are supported")
    sv = initial_state(c.num_qubits, "0" * c.num_qubits if initial is None else initial)
    for g in c.gates:
        sv = apply_gate(sv, g)
    return sv


def marginal_distribution(sv: StateVector, qubits: Sequence[int]) -> Distribution:
    """Born-rule marginal over ``qubits``; keys list the qubits in request order."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < sv.num_qubits for q in qubits):
        raise ValueError(f"bad qubit list {qubits}")
    probs = np.abs(sv.values) ** 2
    key = np.zeros(len(sv.indices), dtype=np.int64)
    for pos, q in enumerate(qubits):
        key |= ((sv.indices >> q) & 1) << pos
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv, weights=probs, minlength=len(uniq))
    return {format_index(int(k), len(qubits)): float(p)
            for k, p in zip(uniq, sums) if p >= PROB_ATOL}


def sample(d: Distribution, shots: int, seed: int | Sequence[int]) -> Distribution:
    """Empirical frequencies of ``shots`` independent draws from ``d``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    keys = sorted(d)
    p = np.array([d[k] for k in keys], dtype=float)
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return {k: int(c) / shots for k, c in zip(keys, counts) if c}


def hellinger_fidelity(p: Distribution, q: Distribution) -> float:
    """(sum_k sqrt(p_k q_k))^2 over the union of keys, clamped to [0, 1]."""
    bc = sum(math.sqrt(p[k] * q[k]) for k in p.keys() & q.keys() if p[k] > 0 and q[k] > 0)
    return min(1.0, max(0.0, bc * bc))


def unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c``, column k being the image of basis index k."""
    n = c.num_qubits
    if n > 12:
        raise ValueError("unitary() is meant for small circuits")
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        sv = StateVector(n, np.array([k], dtype=np.int64), np.array([1.0 + 0j]))
        for g in c.gates:
            sv = apply_gate(sv, g)
        out[sv.indices, k] = sv.values
    return out


def gate_unitary(g: Gate, num_qubits: int | None = None) -> np.ndarray:
    n = num_qubits if num_qubits is not None else max(g.qubits) + 1
    return unitary(Circuit(n, (g,)))


class MeasurementBackend(Protocol):
    def measure(self, prefix: Circuit, initial, qubits: Sequence[int]) -> Distribution:
        """Z-basis distribution over ``qubits`` after running ``prefix``."""


class ExactBackend:
    """Exact marginals. Successive prefixes that extend one another reuse the
    cached state instead of re-simulating from scratch."""

    def __init__(self):
        self._gates: list[Gate] = []
        self._key = None
        self._state: StateVector | None = None

    def state(self, prefix: Circuit, initial) -> StateVector:
        key = (prefix.num_qubits, initial if isinstance(initial, str) else id(initial))
        gates = prefix.gates
        n = len(self._gates)
        reuse = (self._state is not None and key == self._key and len(gates) >= n
                 and all(a == b for a, b in zip(gates[:n], self._gates)))
        if not reuse:
            self._key = key
            self._gates = []
            self._state = initial_state(prefix.num_qubits, initial)
            n = 0
        sv = self._state
        for g in gates[n:]:
            sv = apply_gate(sv, g)
        self._state = sv
        self._gates = list(gates)
        return sv

    def measure(self, prefix: Circuit, initial, qubits: Sequence[int]) -> Distribution:
        return marginal_distribution(self.state(prefix, initial), qubits)


class SampledBackend:
    """Finite-shot estimate of the exact marginal.

    The draw is seeded from ``(seed, len(prefix), qubits)``, so the result is a
    function of the circuit prefix, the qubits, the shot count and the seed.
    """

    def __init__(self, shots: int, seed: int):
        if shots < 1:
            raise ValueError("shots must be >= 1")
        self.shots = shots
        self.seed = seed
        self._exact = ExactBackend()

    def measure(self, prefix: Circuit, initial, qubits: Sequence[int]) -> Distribution:
        exact = self._exact.measure(prefix, initial, qubits)
        sub_seed = np.random.SeedSequence([self.seed, len(prefix.gates), *qubits])
        return sample(exact, self.shots, sub_seed)


def output_distribution(c: Circuit, initial=None, qubits: Sequence[int] | None = None) -> Distribution:
    sv = evolve(c, initial)
    return marginal_distribution(sv, range(c.num_qubits) if qubits is None else qubits)
