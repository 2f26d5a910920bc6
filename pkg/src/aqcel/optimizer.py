"""State-dependent control removal.

Pipeline run by :func:`optimize`:

1. decompose gates with three or more controls into RCCX ladders;
2. cancel adjacent inverse pairs;
3. scan the gates in order, deciding for each controlled gate from the qubit
   labels (or, failing that, from a Z-basis measurement of its controls on the
   already rewritten prefix) which controls can be dropped or whether the
   gate never fires; the uncompute partner of a rewritten compute gate gets
   the same rewrite;
4. remove CX pairs whose target is a scratch |0> qubit copy of the control;
5. cancel inverse pairs again.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

from .circuit import Circuit, Gate, inverse, two_qubit_count
from .labels import Decision, LabelStore
from .lowering import lower_circuit
from .simulator import Distribution, ExactBackend, MeasurementBackend, SampledBackend


@dataclass(frozen=True)
class OptimizerConfig:
    threshold: float = 0.0
    backend: str = "exact"  # exact | sampled
    shots: int = 100_000
    seed: int = 0
    label_manager: bool = True
    strict_labels: bool = False
    bell_upgrade: bool = False
    # None follows label_manager: the removal relies on the label trace
    cx_pair_removal: bool | None = None
    ancilla_limit: int | None = None
    trace_labels: bool = False

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.backend not in ("exact", "sampled"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")

    @property
    def remove_cx(self) -> bool:
        return self.label_manager if self.cx_pair_removal is None else self.cx_pair_removal

    def make_backend(self) -> MeasurementBackend:
        if self.backend == "exact":
            return ExactBackend()
        return SampledBackend(self.shots, self.seed)


@dataclass(frozen=True)
class SupportSet:
    patterns: frozenset[str]
    source: str = "measured"  # measured | label

    def __bool__(self) -> bool:
        return bool(self.patterns)

    def __iter__(self):
        return iter(sorted(self.patterns))

    def __len__(self) -> int:
        return len(self.patterns)


@dataclass
class OptimizationReport:
    measurements_performed: int = 0
    measurements_skipped: int = 0
    gates_mirrored: int = 0
    gates_deleted: int = 0
    controls_removed: int = 0
    cx_pairs_removed: int = 0
    inverse_pairs_cancelled: int = 0
    two_qubit_before: int = 0
    two_qubit_after: int = 0
    two_qubit_baseline: int = 0
    raw_multiqubit_before: int = 0
    raw_multiqubit_after: int = 0
    timing: dict[str, float] = field(default_factory=dict)
    trace: list[dict] | None = None

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("timing")
        if d["trace"] is None:
            d.pop("trace")
        return d


# -- passes -------------------------------------------------------------------

def cancel_inverse_pairs(c: Circuit) -> tuple[Circuit, int]:
    """Remove ``g, g^-1`` pairs on identical qubits with nothing in between
    touching those qubits, to a fixpoint; identity rotations are dropped.

    Pair links held by a cancelled gate are handed to the gate it was linked
    to, so a compute gate whose uncompute partner cancelled against the next
    ladder's compute gate ends up linked to that ladder's uncompute gate.
    Returns the new circuit and the number of pairs removed.
    """
    gates = [g for g in c.gates if not g.is_identity()]
    removed = 0
    changed = True
    while changed:
        changed = False
        alive = [True] * len(gates)
        last: dict[int, int] = {}  # qubit -> index of last live gate touching it
        link = {g.gate_id: g.pair_link for g in gates if g.pair_link is not None}
        by_id = {g.gate_id: g for g in gates}
        for i, g in enumerate(gates):
            prev = {last.get(q) for q in g.qubits}
            if len(prev) == 1:
                j = prev.pop()
                if j is not None and alive[j]:
                    h = gates[j]
                    if set(h.qubits) == set(g.qubits) and _cancels(h, g):
                        alive[i] = alive[j] = False
                        removed += 1
                        changed = True
                        _relink(link, by_id, h.gate_id, g.gate_id)
                        for q in g.qubits:
                            del last[q]
                        # restore earlier owners of these qubits
                        for k in range(j - 1, -1, -1):
                            if alive[k]:
                                for q in gates[k].qubits:
                                    if q in g.qubits and q not in last:
                                        last[q] = k
                            if all(q in last for q in g.qubits):
                                break
                        continue
            for q in g.qubits:
                last[q] = i
        gates = [replace(g, pair_link=link.get(g.gate_id)) for g, a in zip(gates, alive) if a]
    return Circuit.from_gates(c.num_qubits, gates, c.ancillas, renumber=False), removed


def _cancels(h: Gate, g: Gate) -> bool:
    if h.controls != g.controls and sorted(h.controls) != sorted(g.controls):
        return False
    if h.is_rccx or g.is_rccx:
        # the relative phase depends on control order
        return h.controls == g.controls and h.target == g.target and inverse(h).kind == g.kind
    return inverse(h) == replace(g, controls=h.controls)


def _relink(link: dict, by_id: dict, a: int, b: int) -> None:
    """Gates a and b vanish; join their outside partners to each other when
    those act on the same controls and target."""
    pa, pb = link.pop(a, None), link.pop(b, None)
    if pa == b:
        return
    if pa is not None:
        link.pop(pa, None)
    if pb is not None:
        link.pop(pb, None)
    if pa is not None and pb is not None and by_id[pa].qubits == by_id[pb].qubits:
        link[pa] = pb
        link[pb] = pa


def filter_support(d: Distribution, threshold: float) -> SupportSet:
    """Patterns whose probability is at least ``threshold`` (no renormalization)."""
    return SupportSet(frozenset(k for k, p in d.items() if p >= threshold and p > 0))


def reduce_controls(controls: Sequence[int], support: Iterable[str]) -> list[int] | None:
    """Greedy control removal against a support set over ``controls``.

    Returns the controls that must stay, or ``None`` if the gate never fires.
    A control is dropped when every pattern in which all other remaining
    controls are 1 also has it at 1; candidates are tried rightmost first and
    the scan restarts after each removal.
    """
    pats = [p for p in support]
    n = len(controls)
    if any(len(p) != n for p in pats):
        raise ValueError("pattern width does not match the control list")
    if "1" * n not in pats:
        return None
    keep = list(range(n))
    changed = True
    while changed:
        changed = False
        for i in reversed(keep):
            others = [k for k in keep if k != i]
            if all(p[i] == "1" for p in pats if all(p[k] == "1" for k in others)):
                keep.remove(i)
                changed = True
                break
    return [controls[k] for k in keep]


def remove_cx_pairs(c: Circuit, zero_before: set[int]) -> tuple[Circuit, int]:
    """Drop CX pairs that copy a control onto a scratch |0> target and back.

    ``zero_before`` holds the ids of gates whose target was labelled Zero just
    before the gate ran. A pair CX(c->t) ... CX(c->t) is removed when t was
    Zero before the first CX and, in between, t is only ever used as a
    control and c is never written. Gates in between controlled on t are
    re-controlled on c. Innermost pairs go first; the scan repeats until no
    pair is left.
    """
    gates = list(c.gates)
    removed = 0
    changed = True
    while changed:
        changed = False
        for j, g in enumerate(gates):
            if g.kind != "cx":
                continue
            ctl, tgt = g.controls[0], g.target
            # nearest earlier CX with the same control and target
            i = None
            for k in range(j - 1, -1, -1):
                h = gates[k]
                if h.kind == "cx" and h.controls == g.controls and h.target == tgt:
                    i = k
                    break
                if tgt in h.targets or ctl in h.targets:
                    break
            if i is None or gates[i].gate_id not in zero_before:
                continue
            mid = []
            for h in gates[i + 1:j]:
                if tgt in h.controls:
                    h = h.with_controls([ctl if q == tgt else q for q in h.controls])
                mid.append(h)
            gates = gates[:i] + mid + gates[j + 1:]
            removed += 1
            changed = True
            break
    return Circuit.from_gates(c.num_qubits, gates, c.ancillas, renumber=False), removed


# -- main scan ----------------------------------------------------------------

@dataclass
class _Mirror:
    controls: list[int] | None  # None: partner deleted
    step: int


def _phase_safe(g: Gate, store: LabelStore, support: SupportSet | None) -> bool:
    """Whether an unpaired RCCX can be rewritten without losing its phase.

    Its -1 phase sits on |c1 c2 t> = |1 0 1>; it is harmless when that
    configuration never occurs.
    """
    c1, c2 = g.controls
    l1, l2 = store[c1], store[c2]
    if store[g.target].kind == "zero" or l1.kind == "zero" or l2.kind == "one":
        return True
    if l1.is_bell and l2.is_bell and l1.group == l2.group and l1.parity == l2.parity:
        return True
    return support is not None and support.source == "measured" and "10" not in support.patterns


class _Scan:
    def __init__(self, c: Circuit, initial: str, cfg: OptimizerConfig,
                 backend: MeasurementBackend, report: OptimizationReport,
                 observer: Callable[[LabelStore, list[Gate]], None] | None = None):
        self.c = c
        self.observer = observer
        self.initial = initial
        self.cfg = cfg
        self.backend = backend
        self.report = report
        self.store = LabelStore.from_bits(initial, strict_labels=cfg.strict_labels,
                                          bell_upgrade=cfg.bell_upgrade)
        self.out: list[Gate] = []
        self.zero_before: set[int] = set()
        self.mirror: dict[int, _Mirror] = {}
        self.trace: list[dict] | None = [] if cfg.trace_labels else None

    def run(self) -> list[Gate]:
        for g in self.c.gates:
            self.visit(g)
            if self.observer is not None:
                self.observer(self.store, self.out)
        return self.out

    def _emit(self, g: Gate, revert: bool = False) -> None:
        if self.store[g.target].kind == "zero":
            self.zero_before.add(g.gate_id)
        if revert:
            self.store.revert_on_pair(g)
        else:
            self.store.propagate(g)
        self.out.append(g)

    def _log(self, g: Gate, action: str, new: Gate | None) -> None:
        if self.trace is None:
            return
        self.trace.append({"gate_id": g.gate_id, "gate": str(g), "action": action,
                           "rewritten": None if new is None else str(new),
                           "labels": self.store.snapshot()})

    def _rewrite(self, g: Gate, keep: list[int] | None) -> Gate | None:
        if keep is None:
            self.report.gates_deleted += 1
            self.report.controls_removed += len(g.controls)
            return None
        self.report.controls_removed += len(g.controls) - len(keep)
        return g if list(keep) == list(g.controls) else g.with_controls(keep)

    def visit(self, g: Gate) -> None:
        partner = self.mirror.pop(g.gate_id, None) if g.pair_link is not None else None
        if partner is not None and all(self.store.last_write[q] < partner.step for q in g.controls):
            self.report.gates_mirrored += 1
            new = self._rewrite(g, partner.controls)
            if new is not None:
                revert = self.store.can_revert(g, partner.step)
                self._emit(new, revert=revert)
            self._log(g, "mirror", new)
            return
        if not g.controls:
            self._emit(g)
            self._log(g, "pass", g)
            return
        keep, support = self.decide(g)
        linked = g.pair_link is not None and g.pair_link > g.gate_id
        if g.is_rccx and not linked and keep != list(g.controls):
            if not _phase_safe(g, self.store, support):
                keep = list(g.controls)
        new = self._rewrite(g, keep)
        if linked:
            self.mirror[g.pair_link] = _Mirror(keep, self.store.step + 1)
        if new is not None:
            self._emit(new)
        else:
            # record that the partner's target was not written in between
            self.store.step += 1
        self._log(g, "measure" if support is not None and support.source == "measured" else "label", new)

    def decide(self, g: Gate) -> tuple[list[int] | None, SupportSet | None]:
        if self.cfg.label_manager:
            dec = self.store.classify(g)
        else:
            dec = Decision("measure", g.controls)
        if dec.action != "measure":
            self.report.measurements_skipped += 1
            if dec.action == "delete":
                return None, SupportSet(frozenset(), "label")
            if dec.action == "keep":
                return list(g.controls), None
            return [q for q in g.controls if q not in dec.qubits], None
        self.report.measurements_performed += 1
        prefix = Circuit.from_gates(self.c.num_qubits, self.out, self.c.ancillas, renumber=False)
        dist = self.backend.measure(prefix, self.initial, list(g.controls))
        support = filter_support(dist, self.cfg.threshold)
        if not support:
            return None, support
        self.store.apply_measurement_result(g.controls, support.patterns)
        return reduce_controls(g.controls, support.patterns), support


def baseline(c: Circuit, ancilla_limit: int | None = None) -> Circuit:
    """Decomposition plus inverse-pair cancellation, with no state information."""
    lowered = lower_circuit(c, ancilla_limit)
    return cancel_inverse_pairs(lowered)[0]


def optimize(c: Circuit, initial: str | None = None, cfg: OptimizerConfig | None = None,
             backend: MeasurementBackend | None = None,
             observer: Callable[[LabelStore, list[Gate]], None] | None = None,
             ) -> tuple[Circuit, OptimizationReport]:
    """Run the full pipeline on ``c`` for the basis input ``initial``.

    The returned circuit may have more qubits than ``c`` (fresh ancillas are
    appended); the input string is padded with zeros for them. ``observer``,
    if given, is called after every scanned gate with the label store and the
    rewritten gates so far (used to audit the labels).
    """
    cfg = cfg or OptimizerConfig()
    initial = "0" * c.num_qubits if initial is None else initial
    if len(initial) != c.num_qubits or set(initial) - {"0", "1"}:
        raise ValueError(f"initial must be a {c.num_qubits}-bit string")
    backend = backend or cfg.make_backend()
    report = OptimizationReport()
    before = two_qubit_count(c)
    report.two_qubit_before, report.raw_multiqubit_before = before.lowered, before.raw

    t0 = time.perf_counter()
    lowered = lower_circuit(c, cfg.ancilla_limit)
    initial = initial + "0" * (lowered.num_qubits - c.num_qubits)
    t1 = time.perf_counter()
    work, n1 = cancel_inverse_pairs(lowered)
    report.two_qubit_baseline = two_qubit_count(work).lowered
    t2 = time.perf_counter()
    scan = _Scan(work, initial, cfg, backend, report, observer)
    gates = scan.run()
    work = Circuit.from_gates(work.num_qubits, gates, work.ancillas, renumber=False)
    t3 = time.perf_counter()
    if cfg.remove_cx:
        work, report.cx_pairs_removed = remove_cx_pairs(work, scan.zero_before)
    t4 = time.perf_counter()
    work, n2 = cancel_inverse_pairs(work)
    work = Circuit.from_gates(work.num_qubits, work.gates, work.ancillas)
    t5 = time.perf_counter()

    report.inverse_pairs_cancelled = n1 + n2
    after = two_qubit_count(work)
    report.two_qubit_after, report.raw_multiqubit_after = after.lowered, after.raw
    report.timing = {"lower": t1 - t0, "cancel": (t2 - t1) + (t5 - t4), "scan": t3 - t2,
                     "cx_pairs": t4 - t3}
    report.trace = scan.trace
    return work, report
