"""Abstract per-qubit state labels tracked through a circuit.

A label makes a claim about the Z-basis support of one qubit:

* ``Zero`` / ``One``: the qubit is deterministically 0 / 1.
* ``Bell(group, parity)``: for any two members i, j of the group, every basis
  state with nonzero amplitude has ``bit_i ^ bit_j == parity_i ^ parity_j``.
* ``Superpos``: the qubit was seen in both values; no correlation claim.
* ``Unknown``: no claim at all.

The store also remembers, per qubit, the last gate that wrote it and the label
it had before, so the second gate of a compute/uncompute pair can restore it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuit import DIAGONAL, Gate


@dataclass(frozen=True)
class Label:
    kind: str  # zero | one | bell | superpos | unknown
    group: int | None = None
    parity: int = 0

    def __str__(self) -> str:
        if self.kind == "bell":
            return f"Bell({self.group},{self.parity})"
        return {"zero": "0", "one": "1", "superpos": "0/1", "unknown": "?"}[self.kind]

    @property
    def is_bell(self) -> bool:
        return self.kind == "bell"


ZERO = Label("zero")
ONE = Label("one")
SUPERPOS = Label("superpos")
UNKNOWN = Label("unknown")


def bell(group: int, parity: int) -> Label:
    return Label("bell", group, parity)


class EmptySupport(ValueError):
    pass


@dataclass(frozen=True)
class Decision:
    """Outcome of :meth:`LabelStore.classify` for a controlled gate.

    ``qubits`` holds the controls to strip (``strip``) or measure (``measure``).
    """

    action: str  # delete | strip | keep | measure
    qubits: tuple[int, ...] = ()


@dataclass
class _History:
    gate_id: int | None
    step: int
    before: Label


@dataclass
class LabelStore:
    """Mutable label context for one optimization run.

    ``strict_labels`` sends diagonal gates (and Y) to Unknown instead of
    preserving labels; ``bell_upgrade`` lets a CX from a Superpos control onto
    a Zero target open a new Bell group rather than marking the target Superpos.
    """

    num_qubits: int
    strict_labels: bool = False
    bell_upgrade: bool = False
    labels: list[Label] = field(init=False)
    groups: dict[int, set[int]] = field(init=False, default_factory=dict)
    history: list[_History | None] = field(init=False)
    last_write: list[int] = field(init=False)
    step: int = field(init=False, default=0)
    _next_group: int = field(init=False, default=0)

    def __post_init__(self):
        self.labels = [ZERO] * self.num_qubits
        self.history = [None] * self.num_qubits
        self.last_write = [-1] * self.num_qubits

    @classmethod
    def from_bits(cls, bits: str, **kw) -> "LabelStore":
        store = cls(len(bits), **kw)
        store.labels = [ONE if b == "1" else ZERO for b in bits]
        return store

    def __getitem__(self, q: int) -> Label:
        return self.labels[q]

    def snapshot(self) -> list[str]:
        return [str(lab) for lab in self.labels]

    # -- low-level updates -----------------------------------------------------

    def _new_group(self) -> int:
        gid = self._next_group
        self._next_group += 1
        self.groups[gid] = set()
        return gid

    def _leave_group(self, q: int) -> None:
        lab = self.labels[q]
        if not lab.is_bell:
            return
        members = self.groups.get(lab.group)
        if members is None:
            return
        members.discard(q)
        if len(members) < 2:
            for other in members:
                self.labels[other] = SUPERPOS
            del self.groups[lab.group]

    def set_label(self, q: int, lab: Label) -> None:
        old = self.labels[q]
        if old == lab:
            return
        if old.is_bell and not (lab.is_bell and lab.group == old.group):
            self._leave_group(q)
        self.labels[q] = lab
        if lab.is_bell:
            self.groups.setdefault(lab.group, set()).add(q)

    def _write(self, q: int, lab: Label, gate_id: int | None) -> None:
        self.history[q] = _History(gate_id, self.step, self.labels[q])
        self.last_write[q] = self.step
        self.set_label(q, lab)

    def _merge(self, gid_keep: int, gid_drop: int, offset: int) -> None:
        for q in sorted(self.groups.pop(gid_drop)):
            lab = self.labels[q]
            self.labels[q] = bell(gid_keep, lab.parity ^ offset)
            self.groups[gid_keep].add(q)

    # -- propagation -----------------------------------------------------------

    def _single_rule(self, base: str, lab: Label) -> Label:
        if base == "x" or (base == "y" and not self.strict_labels):
            if lab.kind == "zero":
                return ONE
            if lab.kind == "one":
                return ZERO
            if lab.is_bell:
                return bell(lab.group, 1 - lab.parity)
            return lab
        if base in DIAGONAL and not self.strict_labels:
            return lab
        return UNKNOWN

    def propagate(self, g: Gate) -> None:
        """Update labels for gate ``g`` as it will actually run."""
        self.step += 1
        t = g.target
        tl = self.labels[t]
        ctrl = [self.labels[c] for c in g.controls]
        if any(lab.kind == "zero" for lab in ctrl):
            # never fires; only the (unchanged) target is recorded as written
            self._write(t, tl, g.gate_id)
            return
        # One controls always fire; rccx moves populations exactly like ccx
        live = [c for c, lab in zip(g.controls, ctrl) if lab.kind != "one"]
        if not live:
            self._write(t, self._single_rule(g.base_kind, tl), g.gate_id)
            return
        if g.base_kind in DIAGONAL and not self.strict_labels:
            self._write(t, tl, g.gate_id)
            return
        if g.base_kind == "x" and len(live) == 1 and tl.kind == "zero":
            cl = self.labels[live[0]]
            if cl.is_bell:
                self._write(t, bell(cl.group, cl.parity), g.gate_id)
                return
            if cl.kind == "superpos":
                if self.bell_upgrade:
                    gid = self._new_group()
                    self.set_label(live[0], bell(gid, 0))
                    self._write(t, bell(gid, 0), g.gate_id)
                else:
                    self._write(t, SUPERPOS, g.gate_id)
                return
        self._write(t, UNKNOWN, g.gate_id)

    # -- classification --------------------------------------------------------

    def classify(self, g: Gate) -> Decision:
        """Decide whether the controls of ``g`` need a measurement."""
        controls = g.controls
        labs = [self.labels[c] for c in controls]
        if any(lab.kind == "zero" for lab in labs):
            return Decision("delete")
        if len(controls) == 2 and all(lab.is_bell for lab in labs) and labs[0].group == labs[1].group:
            if labs[0].parity == labs[1].parity:
                return Decision("strip", (controls[1],))
            return Decision("delete")
        if any(lab.kind == "unknown" for lab in labs):
            return Decision("measure", tuple(controls))
        ones = tuple(c for c, lab in zip(controls, labs) if lab.kind == "one")
        rest = [c for c, lab in zip(controls, labs) if lab.kind != "one"]
        if len(rest) <= 1:
            return Decision("strip", ones) if ones else Decision("keep")
        return Decision("measure", tuple(controls))

    # -- measurement results ---------------------------------------------------

    def apply_measurement_result(self, qubits: Sequence[int], support: Iterable[str]) -> None:
        """Refine labels from the surviving patterns over ``qubits`` (request order)."""
        qubits = list(qubits)
        support = set(support)
        if not support:
            raise EmptySupport("support set is empty")
        if len(qubits) == 2 and support in ({"00", "11"}, {"01", "10"}):
            self._join_bell(qubits[0], qubits[1], 0 if support == {"00", "11"} else 1)
            return
        for pos, q in enumerate(qubits):
            vals = {pat[pos] for pat in support}
            if vals == {"0"}:
                self.set_label(q, ZERO)
            elif vals == {"1"}:
                self.set_label(q, ONE)
            elif not self.labels[q].is_bell:
                self.set_label(q, SUPERPOS)

    def _join_bell(self, a: int, b: int, diff: int) -> None:
        la, lb = self.labels[a], self.labels[b]
        if la.is_bell and lb.is_bell:
            if la.group != lb.group:
                self._merge(la.group, lb.group, la.parity ^ lb.parity ^ diff)
            return
        if lb.is_bell:
            a, b, la, lb = b, a, lb, la
        if la.is_bell:
            self.set_label(b, bell(la.group, la.parity ^ diff))
            return
        gid = self._new_group()
        self.set_label(a, bell(gid, 0))
        self.set_label(b, bell(gid, diff))

    # -- pair revert -----------------------------------------------------------

    def can_revert(self, g: Gate, partner_step: int) -> bool:
        """True if ``g``'s target was last written by its partner and no
        control of ``g`` has been written since the partner ran."""
        h = self.history[g.target]
        if g.pair_link is None or h is None or h.gate_id != g.pair_link or h.step != partner_step:
            return False
        return all(self.last_write[c] < partner_step for c in g.controls)

    def revert_on_pair(self, g: Gate) -> None:
        """Restore the target label from before the partner gate."""
        self.step += 1
        before = self.history[g.target].before
        if before.is_bell and before.group not in self.groups:
            before = SUPERPOS
        self._write(g.target, before, g.gate_id)


def label_violations(store: LabelStore, sv, atol: float = 1e-12) -> list[str]:
    """Claims in ``store`` contradicted by the statevector ``sv``.

    Basis states with |amplitude| <= ``atol`` are ignored. Unknown and
    Superpos make no checkable claim.
    """
    import numpy as np

    idx = sv.indices[np.abs(sv.values) > atol]
    bad = []
    for q, lab in enumerate(store.labels[: sv.num_qubits]):
        bits = (idx >> q) & 1
        if lab.kind == "zero" and bits.any():
            bad.append(f"q{q} labelled 0 but has support on 1")
        elif lab.kind == "one" and not bits.all():
            bad.append(f"q{q} labelled 1 but has support on 0")
    for gid, members in store.groups.items():
        members = sorted(members)
        for a, b in zip(members, members[1:]):
            want = store.labels[a].parity ^ store.labels[b].parity
            got = ((idx >> a) & 1) ^ ((idx >> b) & 1)
            if (got != want).any():
                bad.append(f"Bell group {gid}: q{a} ^ q{b} != {want} on some branch")
    return bad
