"""Gate-level circuit representation, gate algebra and the ``.circ`` text format.

Circuit files hold one directive per line; ``#`` starts a comment::

    qubits 6
    ancilla 4 5
    ry(0.7) 0
    cx 0 1
    rccx 0 1 4 @p0
    mcu(u3,0.3,0.1,0.2) 0 1 2 ; 3

Controls are listed before targets. ``mcu`` separates controls from the target
with ``;``. A trailing ``@tag`` marks the two gates of a compute/uncompute pair.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

SINGLE_QUBIT = ("x", "y", "z", "h", "s", "sdg", "t", "tdg", "ry", "rz", "u3")
DIAGONAL = frozenset({"z", "s", "sdg", "t", "tdg", "rz"})
SELF_INVERSE = frozenset({"x", "y", "z", "h"})
NUM_PARAMS = {"ry": 1, "rz": 1, "u3": 3}

# kind -> (number of controls, base single-qubit kind)
CONTROLLED = {
    "cx": (1, "x"),
    "cz": (1, "z"),
    "cry": (1, "ry"),
    "ccx": (2, "x"),
    "rccx": (2, "x"),
    "rccxdg": (2, "x"),
}
KINDS = frozenset(SINGLE_QUBIT) | frozenset(CONTROLLED) | {"mcu"}

ANGLE_ATOL = 1e-12


class CircuitError(ValueError):
    """Base class for malformed circuits."""


class UnsupportedGate(CircuitError):
    pass


class QubitIndexError(CircuitError):
    pass


class CircuitSyntaxError(CircuitError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Gate:
    """One gate instance.

    ``gate_id`` and ``pair_link`` are bookkeeping and do not take part in
    equality, so ``inverse(cx) == cx`` holds regardless of identity.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()
    base: str | None = None
    gate_id: int | None = field(default=None, compare=False)
    pair_link: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedGate(f"unsupported gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.targets) != 1:
            raise CircuitError(f"{self.kind} takes exactly one target")
        if self.kind == "mcu":
            if self.base not in SINGLE_QUBIT:
                raise UnsupportedGate(f"unsupported mcu base {self.base!r}")
            if not self.controls:
                raise CircuitError("mcu needs at least one control")
        elif self.base is not None:
            raise CircuitError(f"{self.kind} does not take a base gate")
        if self.kind in CONTROLLED:
            want = CONTROLLED[self.kind][0]
            if len(self.controls) != want:
                raise CircuitError(f"{self.kind} takes exactly {want} control(s)")
        elif self.kind in SINGLE_QUBIT and self.controls:
            raise CircuitError(f"{self.kind} takes no controls")
        if len(self.params) != NUM_PARAMS.get(self.base_kind, 0):
            raise CircuitError(f"{self.kind} takes {NUM_PARAMS.get(self.base_kind, 0)} parameter(s)")
        qs = self.controls + self.targets
        if len(set(qs)) != len(qs):
            raise CircuitError(f"{self.kind}: controls and targets must be distinct")
        if any(q < 0 for q in qs):
            raise QubitIndexError("negative qubit index")

    @property
    def base_kind(self) -> str:
        """The single-qubit operation applied when every control is 1."""
        if self.kind == "mcu":
            return self.base
        if self.kind in CONTROLLED:
            return CONTROLLED[self.kind][1]
        return self.kind

    @property
    def target(self) -> int:
        return self.targets[0]

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def is_rccx(self) -> bool:
        return self.kind in ("rccx", "rccxdg")

    def is_identity(self) -> bool:
        """True for rotations whose angles are all below ``ANGLE_ATOL``."""
        return self.base_kind in NUM_PARAMS and all(abs(p) < ANGLE_ATOL for p in self.params)

    def with_controls(self, controls: Sequence[int]) -> "Gate":
        """Same operation with a new control list (duplicates collapse)."""
        controls = tuple(dict.fromkeys(controls))
        if self.is_rccx and len(controls) == 2:
            return replace(self, controls=controls)
        return controlled(self.base_kind, self.params, controls, self.target,
                          gate_id=self.gate_id, pair_link=self.pair_link)

    def __str__(self) -> str:
        return format_gate(self)


def controlled(base: str, params: Sequence[float], controls: Sequence[int], target: int,
               gate_id: int | None = None, pair_link: int | None = None) -> Gate:
    """Canonical gate for ``base`` under ``controls``: x/cx/ccx, z/cz, ry/cry, else mcu."""
    controls = tuple(controls)
    n = len(controls)
    named = {("x", 0): "x", ("x", 1): "cx", ("x", 2): "ccx", ("z", 1): "cz", ("ry", 1): "cry"}
    kind = named.get((base, n))
    if kind is None:
        kind = base if n == 0 else "mcu"
    return Gate(kind, (target,), controls, tuple(params), base if kind == "mcu" else None,
                gate_id=gate_id, pair_link=pair_link)


def inverse(g: Gate) -> Gate:
    """Return the inverse gate on the same controls and targets."""
    kind, base = g.kind, g.base_kind
    if kind == "rccx":
        return replace(g, kind="rccxdg")
    if kind == "rccxdg":
        return replace(g, kind="rccx")
    if base in SELF_INVERSE:
        return g
    if base in ("s", "sdg", "t", "tdg"):
        flipped = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}[base]
        return replace(g, base=flipped) if kind == "mcu" else replace(g, kind=flipped)
    if base in ("ry", "rz"):
        return replace(g, params=(-g.params[0],))
    if base == "u3":
        theta, phi, lam = g.params
        return replace(g, params=(-theta, -lam, -phi))
    raise UnsupportedGate(f"no inverse for {kind!r}")


def _single_cost(base: str) -> int:
    # controlled Paulis and H need one CX; anything else the generic two
    return 1 if base in ("x", "y", "z", "h") else 2


def lowered_cost(g: Gate) -> int:
    """Two-qubit gates left after lowering ``g`` into CX plus single-qubit gates."""
    n = len(g.controls)
    if n == 0:
        return 0
    if g.is_rccx:
        return 3
    if n == 1:
        return _single_cost(g.base_kind)
    if n == 2:
        if g.base_kind in ("x", "z"):
            return 6
        return 3 + _single_cost(g.base_kind) + 3
    return 6 * (n - 1) + _single_cost(g.base_kind)


class TwoQubitCount(NamedTuple):
    lowered: int
    raw: int


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    ancillas: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "ancillas", frozenset(self.ancillas))
        for q in self.ancillas:
            if not 0 <= q < self.num_qubits:
                raise QubitIndexError(f"ancilla {q} out of range")
        last = None
        ids = {}
        for g in self.gates:
            for q in g.qubits:
                if q >= self.num_qubits:
                    raise QubitIndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
            if g.gate_id is not None:
                if last is not None and g.gate_id <= last:
                    raise CircuitError("gate ids must strictly increase")
                last = g.gate_id
                ids[g.gate_id] = g
        for g in self.gates:
            if g.pair_link is not None:
                partner = ids.get(g.pair_link)
                if partner is None or partner.pair_link != g.gate_id:
                    raise CircuitError(f"pair link of gate {g.gate_id} is not symmetric")

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Iterable[Gate], ancillas: Iterable[int] = (),
                   renumber: bool = True) -> "Circuit":
        """Build a circuit, dropping pair links whose partner is absent.

        With ``renumber`` the gates get ids 0..n-1 and links are remapped;
        otherwise existing ids are kept.
        """
        gates = list(gates)
        present = {g.gate_id for g in gates if g.gate_id is not None}
        if renumber:
            new_id = {g.gate_id: i for i, g in enumerate(gates) if g.gate_id is not None}
            out = []
            for i, g in enumerate(gates):
                link = new_id.get(g.pair_link) if g.pair_link in present else None
                out.append(replace(g, gate_id=i, pair_link=link))
        else:
            out = [g if g.pair_link is None or g.pair_link in present else replace(g, pair_link=None)
                   for g in gates]
        return cls(num_qubits, tuple(out), frozenset(ancillas))

    @property
    def qubit_roles(self) -> tuple[str, ...]:
        return tuple("ancilla" if q in self.ancillas else "data" for q in range(self.num_qubits))

    @property
    def data_qubits(self) -> list[int]:
        return [q for q in range(self.num_qubits) if q not in self.ancillas]

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        n = max(self.num_qubits, other.num_qubits)
        off = 1 + max((g.gate_id for g in self.gates if g.gate_id is not None), default=-1)
        shifted = [replace(g, gate_id=None if g.gate_id is None else g.gate_id + off,
                           pair_link=None if g.pair_link is None else g.pair_link + off)
                   for g in other.gates]
        return Circuit.from_gates(n, self.gates + tuple(shifted), self.ancillas | other.ancillas)


def two_qubit_count(c: Circuit) -> TwoQubitCount:
    """Lowered and raw tallies of multi-qubit gates."""
    lowered = sum(lowered_cost(g) for g in c.gates)
    raw = sum(1 for g in c.gates if g.controls)
    return TwoQubitCount(lowered, raw)


# -- text format --------------------------------------------------------------

def _fmt_angle(x: float) -> str:
    return repr(float(x))


def format_gate(g: Gate, tag: str | None = None) -> str:
    if g.kind == "mcu":
        head = "mcu(" + ",".join([g.base] + [_fmt_angle(p) for p in g.params]) + ")"
        body = " ".join(map(str, g.controls)) + " ; " + str(g.target)
    else:
        head = g.kind
        if g.params:
            head += "(" + ",".join(_fmt_angle(p) for p in g.params) + ")"
        body = " ".join(map(str, g.qubits))
    line = f"{head} {body}"
    return f"{line} @{tag}" if tag is not None else line


def emit_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    if c.ancillas:
        lines.append("ancilla " + " ".join(map(str, sorted(c.ancillas))))
    tags: dict[int, str] = {}
    for g in c.gates:
        tag = None
        if g.pair_link is not None:
            if g.gate_id in tags:
                tag = tags[g.gate_id]
            else:
                tag = f"p{len(tags) // 2}"
                tags[g.pair_link] = tag
                tags[g.gate_id] = tag
        lines.append(format_gate(g, tag))
    return "\n".join(lines) + "\n"


def _parse_head(head: str, lineno: int, col: int) -> tuple[str, str | None, tuple[float, ...]]:
    if "(" not in head:
        return head.lower(), None, ()
    if not head.endswith(")"):
        raise CircuitSyntaxError(f"unbalanced parenthesis in {head!r}", lineno, col)
    name, args = head[:-1].split("(", 1)
    parts = [a.strip() for a in args.split(",") if a.strip()]
    name = name.lower()
    base = None
    if name == "mcu":
        if not parts:
            raise CircuitSyntaxError("mcu needs a base gate", lineno, col)
        base, parts = parts[0].lower(), parts[1:]
    try:
        params = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise CircuitSyntaxError(f"bad angle in {head!r}", lineno, col) from exc
    return name, base, params


def _parse_ints(text: str, lineno: int, offset: int) -> list[int]:
    """Integers in ``text``, which starts at column ``offset + 1`` of its line."""
    out = []
    for m in re.finditer(r"\S+", text):
        try:
            out.append(int(m.group()))
        except ValueError:
            raise CircuitSyntaxError(f"expected qubit index, got {m.group()!r}", lineno,
                                     offset + m.start() + 1) from None
    return out


def parse_circuit(text: str) -> Circuit:
    num_qubits = None
    ancillas: set[int] = set()
    gates: list[Gate] = []
    tag_first: dict[str, int] = {}
    links: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tag = None
        if "@" in line:
            line, tag = line.rsplit("@", 1)
            tag = tag.strip()
            if not tag or " " in tag:
                raise CircuitSyntaxError("malformed pair tag", lineno, len(line) + 1)
        head, _, rest = line.strip().partition(" ")
        rest_at = col - 1 + len(head) + 1
        if head == "qubits":
            vals = _parse_ints(rest, lineno, rest_at)
            if len(vals) != 1 or vals[0] < 1:
                raise CircuitSyntaxError("'qubits' takes one positive count", lineno, col)
            num_qubits = vals[0]
            continue
        if num_qubits is None:
            raise CircuitSyntaxError("'qubits N' must come first", lineno, col)
        if head == "ancilla":
            for q in _parse_ints(rest, lineno, rest_at):
                if not 0 <= q < num_qubits:
                    raise QubitIndexError(f"line {lineno}: ancilla {q} out of range")
                ancillas.add(q)
            continue
        kind, base, params = _parse_head(head, lineno, col)
        if kind == "mcu":
            ctrl_part, sep, tgt_part = rest.partition(";")
            if not sep:
                raise CircuitSyntaxError("mcu needs ';' between controls and target", lineno, col)
            controls = _parse_ints(ctrl_part, lineno, rest_at)
            targets = _parse_ints(tgt_part, lineno, rest_at + len(ctrl_part) + 1)
        else:
            qs = _parse_ints(rest, lineno, rest_at)
            n_ctrl = CONTROLLED.get(kind, (0,))[0]
            controls, targets = qs[:n_ctrl], qs[n_ctrl:]
        for q in controls + targets:
            if not 0 <= q < num_qubits:
                raise QubitIndexError(f"line {lineno}: qubit {q} out of range for {num_qubits} qubits")
        try:
            g = Gate(kind, tuple(targets), tuple(controls), params, base, gate_id=len(gates))
        except CircuitError as exc:
            raise CircuitSyntaxError(str(exc), lineno, col) from None
        if tag is not None:
            if tag in tag_first:
                first = tag_first.pop(tag)
                links[first] = g.gate_id
                links[g.gate_id] = first
            else:
                tag_first[tag] = g.gate_id
        gates.append(g)
    if num_qubits is None:
        raise CircuitSyntaxError("missing 'qubits N' directive", 1)
    if tag_first:
        raise CircuitSyntaxError(f"unmatched pair tag(s): {sorted(tag_first)}", 1)
    gates = [replace(g, pair_link=links.get(g.gate_id)) for g in gates]
    return Circuit(num_qubits, tuple(gates), frozenset(ancillas))


def read_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def write_circuit(c: Circuit, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_circuit(c))

