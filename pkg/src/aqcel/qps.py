"""Quantum parton shower benchmark circuits and emission counting.

The shower evolves fermions of two flavours (f1, f2 and their antiparticles)
and a scalar phi for ``n_steps`` steps. Each step rotates every particle into
the mass basis, counts particles of each kind, decides whether an emission
happens, picks the emitter (history register), updates the particle list and
rotates back. Every conditional operation is written as one multi-controlled
gate, with X gates around it for controls that must be 0; the RCCX lowering
later supplies the scratch qubits.

Qubit layout (data qubits only)::

    p0[0..2] p1[0..2] ... | h0 h1 ... | e | n_phi | n_a | n_b

Particle codes are read most-significant bit first, ``p[2] p[1] p[0]``:
000 vacuum, 001 phi, 100 f1, 101 f2, 110 anti-f1, 111 anti-f2.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .circuit import Circuit, Gate, controlled, parse_circuit

CODES = {"vacuum": "000", "phi": "001", "f1": "100", "f2": "101", "af1": "110", "af2": "111"}
DEFAULT_EPS = 0.001


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class QPSParams:
    n_steps: int = 2
    g1: float = 2.0
    g2: float = 1.0
    g12: float = 1.0
    initial_particles: tuple[str, ...] = ("f1",)
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.n_steps not in (1, 2):
            raise Unsupported(f"only 1- and 2-step showers are provided, got {self.n_steps}")
        for p in self.initial_particles:
            if p not in CODES or p == "vacuum":
                raise ValueError(f"unknown initial particle {p!r}")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    @property
    def n_initial(self) -> int:
        return len(self.initial_particles)


@dataclass(frozen=True)
class ParticleLayout:
    n_steps: int
    n_initial: int
    particles: tuple[tuple[int, int, int], ...]  # (p[0], p[1], p[2]) per register
    history: tuple[tuple[int, ...], ...]
    emission: int
    counts: dict[str, tuple[int, ...]] = field(hash=False)
    num_qubits: int = 0

    @classmethod
    def for_steps(cls, n_steps: int, n_initial: int = 1) -> "ParticleLayout":
        n_reg = n_steps + n_initial
        width = math.ceil(math.log2(n_reg))
        q = 0
        particles = []
        for _ in range(n_reg):
            particles.append((q, q + 1, q + 2))
            q += 3
        history = []
        for _ in range(n_steps):
            history.append(tuple(range(q, q + width)))
            q += width
        emission = q
        q += 1
        counts = {}
        for name in ("phi", "a", "b"):
            counts[name] = tuple(range(q, q + width))
            q += width
        return cls(n_steps, n_initial, tuple(particles), tuple(history), emission, counts, q)

    @property
    def particle_qubits(self) -> list[int]:
        return [q for reg in self.particles for q in reg]

    @property
    def measured_qubits(self) -> list[int]:
        """Particle and history qubits, the registers read out at the end."""
        return self.particle_qubits + [q for h in self.history for q in h]

    def to_json(self) -> dict:
        d = asdict(self)
        d["codes"] = CODES
        d["code_bit_order"] = "p[2] p[1] p[0]"
        d["measured"] = self.measured_qubits
        return d


# -- shower physics -----------------------------------------------------------

def mixing(p: QPSParams) -> tuple[float, float, float]:
    """Mass-basis couplings (g_a, g_b) and the flavour mixing amplitude u."""
    gp = math.sqrt(abs((p.g1 - p.g2) ** 2 + 4 * p.g12 ** 2))
    if p.g1 > p.g2:
        gp = -gp
    g_a = (p.g1 + p.g2 - gp) / 2
    g_b = (p.g1 + p.g2 + gp) / 2
    u = math.sqrt(abs((gp + p.g1 - p.g2) / (2 * gp))) if gp else 0.0
    return g_a, g_b, u


def _splitting(t: float, g: float) -> float:
    return g ** 2 * math.log(t) / (4 * math.pi)


def step_tables(p: QPSParams) -> list[dict[str, float]]:
    """Per-step splitting functions and no-emission (Sudakov) factors."""
    g_a, g_b, _ = mixing(p)
    out = []
    n = p.n_steps
    for i in range(n):
        t_up, t_mid, t_low = (p.eps ** ((i + s) / n) for s in (0, 0.5, 1))
        row = {
            "t": t_mid,
            "P_a": _splitting(t_mid, g_a),
            "P_b": _splitting(t_mid, g_b),
            "P_phi": _splitting(t_mid, g_a) + _splitting(t_mid, g_b),
        }
        for name, gs in (("a", (g_a,)), ("b", (g_b,)), ("phi", (g_a, g_b))):
            lo = sum(_splitting(t_low, g) for g in gs)
            hi = sum(_splitting(t_up, g) for g in gs)
            row["Delta_" + name] = math.exp(lo - hi)
        out.append(row)
    return out


def particle_counts(n_initial: int, m: int, k: int) -> list[tuple[int, int, int]]:
    """All (n_phi, n_a, n_b) with each n in [0, n_initial+m-k] and total in
    [n_initial-k, n_initial+m-k]."""
    out = []
    for total in range(n_initial - k, m + n_initial - k + 1):
        for n_phi in range(0, n_initial + m - k + 1):
            for n_a in range(0, total - n_phi + 1):
                out.append((n_phi, n_a, total - n_phi - n_a))
    return out


def emission_angle(flavor: str, counts: Sequence[int], row: Mapping[str, float]) -> float:
    n_phi, n_a, n_b = counts
    denom = n_phi * row["P_phi"] + n_a * row["P_a"] + n_b * row["P_b"]
    if denom == 0:
        return 0.0
    amp = math.sqrt(row["P_" + flavor] / denom)
    return 2 * math.asin(min(1.0, amp))


def angle_table(p: QPSParams) -> dict:
    """Every rotation angle the generator uses, keyed by step."""
    g_a, g_b, u = mixing(p)
    steps = []
    for m, row in enumerate(step_tables(p)):
        emit = {}
        for counts in particle_counts(p.n_initial, m, 0):
            delta = (row["Delta_phi"] ** counts[0] * row["Delta_a"] ** counts[1]
                     * row["Delta_b"] ** counts[2])
            emit[",".join(map(str, counts))] = 2 * math.acos(math.sqrt(delta))
        history = {}
        for k in range(p.n_initial + m):
            for counts in particle_counts(p.n_initial, m, k):
                for flavor in ("phi", "a", "b"):
                    key = f"{k}:{','.join(map(str, counts))}:{flavor}"
                    history[key] = emission_angle(flavor, counts, row)
        steps.append({"emission": emit, "history": history, **row})
    return {
        "params": asdict(p),
        "g_a": g_a, "g_b": g_b, "u": u,
        "rotate_in": 2 * math.asin(-u),
        "rotate_out": 2 * math.asin(u),
        "split": 2 * math.acos(g_a / math.sqrt(g_a ** 2 + g_b ** 2)),
        "steps": steps,
    }


# -- circuit construction -----------------------------------------------------

def _bits_lsb(number: int, width: int) -> list[int]:
    return [(number >> i) & 1 for i in range(width)]


class _Builder:
    def __init__(self, layout: ParticleLayout):
        self.layout = layout
        self.gates: list[Gate] = []

    def x(self, q: int) -> None:
        self.gates.append(Gate("x", (q,)))

    def conditioned(self, ones: Sequence[int], zeros: Sequence[int], base: str,
                    target: int, params: Sequence[float] = ()) -> None:
        """``base`` on ``target`` when ``ones`` are 1 and ``zeros`` are 0."""
        for q in zeros:
            self.x(q)
        self.gates.append(controlled(base, params, list(ones) + list(zeros), target))
        for q in reversed(zeros):
            self.x(q)

    def increment(self, reg: Sequence[int], ones: Sequence[int], zeros: Sequence[int]) -> None:
        for j in reversed(range(len(reg))):
            self.conditioned(list(ones) + list(reg[:j]), zeros, "x", reg[j])

    def decrement(self, reg: Sequence[int], ones: Sequence[int], zeros: Sequence[int]) -> None:
        for q in reg:
            self.x(q)
        self.increment(reg, ones, zeros)
        for q in reg:
            self.x(q)


def _flavor_condition(reg: tuple[int, int, int], flavor: str) -> tuple[list[int], list[int]]:
    p0, p1, p2 = reg
    if flavor == "phi":
        return [p0], [p1, p2]
    if flavor == "a":
        return [p2], [p0]
    return [p0, p2], []


def _number_condition(reg: Sequence[int], number: int) -> tuple[list[int], list[int]]:
    bits = _bits_lsb(number, len(reg))
    return [q for q, b in zip(reg, bits) if b], [q for q, b in zip(reg, bits) if not b]


def _counts_condition(layout: ParticleLayout, counts: Sequence[int], width: int):
    ones, zeros = [], []
    for name, n in zip(("phi", "a", "b"), counts):
        o, z = _number_condition(layout.counts[name][:width], n)
        ones += o
        zeros += z
    return ones, zeros


def _two_level_ry(b: _Builder, hist: Sequence[int], level: int, angle: float,
                  ones: list[int], zeros: list[int]) -> None:
    """Ry between |0> and |level> of the history register, under a condition.

    Only levels 1 and 2 of a 1- or 2-qubit register occur in shipped showers,
    where the rotation reduces to one Ry on a single bit with the other bit 0.
    """
    if len(hist) == 1:
        b.conditioned(ones, zeros, "ry", hist[0], (angle,))
        return
    if len(hist) == 2 and level in (1, 2):
        tgt, other = (hist[0], hist[1]) if level == 1 else (hist[1], hist[0])
        b.conditioned(ones, zeros + [other], "ry", tgt, (angle,))
        return
    raise Unsupported(f"history rotation to level {level} on {len(hist)} qubits")


def build_qps(p: QPSParams | None = None, angles: Mapping | None = None) -> Circuit:
    """Generate the shower circuit for ``p`` (no ancillas; see module docstring).

    ``angles`` overrides the computed rotation table; it must have the shape
    returned by :func:`angle_table` (for instance one read with
    :func:`load_angles`).
    """
    p = p or QPSParams()
    layout = ParticleLayout.for_steps(p.n_steps, p.n_initial)
    table = angle_table(p) if angles is None else angles
    b = _Builder(layout)
    e = layout.emission

    for i, name in enumerate(p.initial_particles):
        code = CODES[name]
        for bit, ch in enumerate(code):
            if ch == "1":
                b.x(layout.particles[i][2 - bit])

    for m in range(p.n_steps):
        width = int(math.floor(math.log2(m + p.n_initial)) + 1)
        steps = table["steps"][m]
        hist = layout.history[m][:width]
        new = layout.particles[p.n_initial + m]

        for reg in layout.particles:
            b.gates.append(controlled("ry", (table["rotate_in"],), (reg[2],), reg[0]))

        for k in range(p.n_initial + m):
            for flavor in ("phi", "a", "b"):
                ones, zeros = _flavor_condition(layout.particles[k], flavor)
                b.increment(layout.counts[flavor][:width], ones, zeros)

        for counts in particle_counts(p.n_initial, m, 0):
            ones, zeros = _counts_condition(layout, counts, width)
            angle = steps["emission"][",".join(map(str, counts))]
            b.conditioned(ones, zeros, "ry", e, (angle,))

        for k in range(p.n_initial + m):
            for counts in particle_counts(p.n_initial, m, k):
                c_ones, c_zeros = _counts_condition(layout, counts, width)
                for flavor in ("phi", "a", "b"):
                    f_ones, f_zeros = _flavor_condition(layout.particles[k], flavor)
                    angle = steps["history"][f"{k}:{','.join(map(str, counts))}:{flavor}"]
                    _two_level_ry(b, hist, k + 1, angle, c_ones + f_ones + [e], c_zeros + f_zeros)
            for flavor in ("phi", "a", "b"):
                ones, zeros = _flavor_condition(layout.particles[k], flavor)
                b.decrement(layout.counts[flavor][:width], ones, zeros)

        # e <- (history register != 0)
        b.conditioned([], list(hist), "x", e)
        b.x(e)

        for k in range(p.n_initial + m):
            old = layout.particles[k]
            h_ones, h_zeros = _number_condition(hist, k + 1)
            b.conditioned(h_ones + [old[2]], h_zeros, "x", new[0])
            b.conditioned(h_ones + [old[0]], h_zeros + [old[2], old[1]], "x", new[2])
            b.conditioned(h_ones + [new[2]], h_zeros, "x", old[2])
            b.conditioned(h_ones + [new[2]], h_zeros, "h", new[1])
            b.conditioned(h_ones + [new[2]], h_zeros, "ry", new[0], (table["split"],))
            b.conditioned(h_ones + [new[2]], h_zeros + [new[1]], "x", old[1])
            b.conditioned(h_ones + [new[2]], h_zeros + [new[0]], "x", old[0])

        for reg in layout.particles:
            b.gates.append(controlled("ry", (table["rotate_out"],), (reg[2],), reg[0]))

    gates = [g for g in b.gates if not g.is_identity()]
    return Circuit.from_gates(layout.num_qubits, gates)


# -- checked-in benchmark files -----------------------------------------------

def _data(name: str):
    return resources.files("aqcel") / "data" / name


def load_qps(n_steps: int) -> Circuit:
    """The shipped ``qps{n}.circ`` benchmark (default couplings)."""
    if n_steps not in (1, 2):
        raise Unsupported(f"no shipped circuit for {n_steps} steps")
    return parse_circuit(_data(f"qps{n_steps}.circ").read_text(encoding="utf-8"))


def load_angles(n_steps: int) -> dict:
    return json.loads(_data(f"qps{n_steps}_angles.json").read_text(encoding="utf-8"))


def write_benchmark_files(directory) -> list[str]:
    """Regenerate the shipped circuit, layout and angle files for the default couplings."""
    from pathlib import Path

    from .circuit import emit_circuit

    out = []
    directory = Path(directory)
    for n in (1, 2):
        p = QPSParams(n_steps=n)
        files = {
            f"qps{n}.circ": emit_circuit(build_qps(p)),
            f"qps{n}_layout.json": json.dumps(ParticleLayout.for_steps(n).to_json(), indent=1) + "\n",
            f"qps{n}_angles.json": json.dumps(angle_table(p), indent=1) + "\n",
        }
        for name, text in files.items():
            (directory / name).write_text(text, encoding="utf-8")
            out.append(name)
    return out


def load_layout(n_steps: int) -> ParticleLayout:
    d = json.loads(_data(f"qps{n_steps}_layout.json").read_text(encoding="utf-8"))
    return ParticleLayout(d["n_steps"], d["n_initial"], tuple(tuple(r) for r in d["particles"]),
                          tuple(tuple(h) for h in d["history"]), d["emission"],
                          {k: tuple(v) for k, v in d["counts"].items()}, d["num_qubits"])


# -- emission counting --------------------------------------------------------

def count_emissions(bits: str, layout: ParticleLayout, initial_count: int | None = None) -> int | None:
    """Emissions in a measured particle bitstring, or ``None`` if unphysical.

    ``bits`` covers the particle qubits in layout order (see
    :attr:`ParticleLayout.particle_qubits`); longer strings, such as the full
    particle-plus-history readout, are accepted and the tail is ignored.
    """
    n_part = 3 * len(layout.particles)
    if len(bits) < n_part:
        raise ValueError(f"bitstring has {len(bits)} bits, particle registers need {n_part}")
    initial_count = layout.n_initial if initial_count is None else initial_count
    present = sum(1 for k in range(len(layout.particles)) if "1" in bits[3 * k:3 * k + 3])
    emissions = present - initial_count
    if present == 0 or emissions < 0:
        return None
    return emissions


def emission_histogram(samples: Iterable[str] | Mapping[str, float], layout: ParticleLayout,
                       initial_count: int | None = None) -> tuple[dict[int, float], float]:
    """Normalized emission histogram over 0..n_steps and the unphysical fraction.

    ``samples`` is a list of bitstrings or a ``{bitstring: weight}`` map.
    """
    weights = samples.items() if isinstance(samples, Mapping) else ((s, 1.0) for s in samples)
    hist = {n: 0.0 for n in range(layout.n_steps + 1)}
    bad = 0.0
    total = 0.0
    for bits, w in weights:
        total += w
        n = count_emissions(bits, layout, initial_count)
        if n is None or n not in hist:
            bad += w
        else:
            hist[n] += w
    if total <= 0:
        raise ValueError("no samples")
    return {n: v / total for n, v in hist.items()}, bad / total
