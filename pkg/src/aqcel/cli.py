"""Command-line front end: ``aqcel optimize|sweep|qps|simulate|fidelity``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .circuit import Circuit, CircuitError, read_circuit, write_circuit
from .optimizer import OptimizerConfig, optimize
from .qps import (QPSParams, ParticleLayout, angle_table, build_qps, emission_histogram,
                  load_layout, load_qps)
from .simulator import hellinger_fidelity, output_distribution, sample


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("AQCEL_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"AQCEL_SEED must be an integer, got {raw!r}") from None


def _threshold(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise argparse.ArgumentTypeError(f"threshold must lie in [0, 1], got {text}")
    return x


def _thresholds(text: str) -> list[float]:
    return [_threshold(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def load_circuit(name: str) -> Circuit:
    """A circuit file, or ``qps1`` / ``qps2`` for the shipped benchmarks."""
    if not Path(name).exists() and name in ("qps1", "qps2"):
        return load_qps(int(name[-1]))
    return read_circuit(name)


def _measured(name: str, c: Circuit, qubits: str | None) -> list[int]:
    if qubits:
        return _ints(qubits)
    if not Path(name).exists() and name in ("qps1", "qps2"):
        return load_layout(int(name[-1])).measured_qubits
    return c.data_qubits


def _config(args, threshold=None, seed=None, label_manager=None) -> OptimizerConfig:
    return OptimizerConfig(
        threshold=args.threshold if threshold is None else threshold,
        backend=args.backend,
        shots=args.shots,
        seed=(args.seed if args.seed is not None else _default_seed()) if seed is None else seed,
        label_manager=(not args.v1) if label_manager is None else label_manager,
        strict_labels=args.strict_labels,
        bell_upgrade=args.bell_upgrade,
        trace_labels=bool(getattr(args, "trace_labels", None)),
    )


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


# -- commands -----------------------------------------------------------------

def cmd_optimize(args) -> int:
    c = load_circuit(args.circuit)
    cfg = _config(args)
    out, report = optimize(c, args.initial, cfg)
    if args.out:
        write_circuit(out, args.out)
    doc = report.to_dict(timing=not args.no_timing)
    trace = doc.pop("trace", None)
    if args.report:
        _write_json(args.report, doc)
    if args.trace_labels and trace is not None:
        _write_json(args.trace_labels, trace)
    print(f"two-qubit gates: {report.two_qubit_before} -> {report.two_qubit_after}"
          f" (baseline {report.two_qubit_baseline})")
    print(f"measurements: {report.measurements_performed} performed,"
          f" {report.measurements_skipped} skipped")
    return 0


def _sweep_point(job):
    circuit_name, measured, initial, cfg = job
    c = load_circuit(circuit_name)
    out, report = optimize(c, initial, cfg)
    ref = output_distribution(c, None, measured)
    got = output_distribution(out, None, measured)
    return {
        "threshold": cfg.threshold,
        "seed": cfg.seed,
        "label_manager": cfg.label_manager,
        "two_qubit_after": report.two_qubit_after,
        "two_qubit_before": report.two_qubit_before,
        "measurements_performed": report.measurements_performed,
        "fidelity": hellinger_fidelity(ref, got),
    }


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and RMS spread of the fidelity over seeds, per (threshold, mode)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["threshold"], r["label_manager"]), []).append(r)
    out = []
    for (th, lm), rs in sorted(groups.items()):
        fs = [r["fidelity"] for r in rs]
        mean = sum(fs) / len(fs)
        rms = math.sqrt(sum((f - mean) ** 2 for f in fs) / len(fs))
        out.append({"threshold": th, "label_manager": lm, "runs": len(rs),
                    "fidelity_mean": mean, "fidelity_rms": rms,
                    "two_qubit_after_mean": sum(r["two_qubit_after"] for r in rs) / len(rs),
                    "measurements_mean": sum(r["measurements_performed"] for r in rs) / len(rs)})
    return out


def cmd_sweep(args) -> int:
    c = load_circuit(args.circuit)
    measured = _measured(args.circuit, c, args.qubits)
    seeds = args.seeds or [args.seed if args.seed is not None else _default_seed()]
    modes = [True, False] if args.both_modes else [not args.v1]
    jobs = [(args.circuit, measured, args.initial, _config(args, th, s, lm))
            for lm in modes for th in args.thresholds for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    summary = summarize(rows)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    if args.json:
        _write_json(args.json, {"rows": rows, "summary": summary})
    for s in summary:
        mode = "v2" if s["label_manager"] else "v1"
        print(f"{mode} threshold={s['threshold']:<6g} cx={s['two_qubit_after_mean']:<7g}"
              f" fidelity={s['fidelity_mean']:.6f} rms={s['fidelity_rms']:.6f}"
              f" measurements={s['measurements_mean']:g}")
    return 0


def cmd_qps(args) -> int:
    p = QPSParams(n_steps=args.steps, g1=args.g1, g2=args.g2, g12=args.g12, eps=args.eps)
    c = build_qps(p)
    layout = ParticleLayout.for_steps(p.n_steps, p.n_initial)
    if args.out:
        write_circuit(c, args.out)
    if args.layout:
        _write_json(args.layout, layout.to_json())
    if args.angles:
        _write_json(args.angles, angle_table(p))
    if args.histogram:
        dist = output_distribution(c, None, layout.particle_qubits)
        if args.shots:
            seed = args.seed if args.seed is not None else _default_seed()
            dist = sample(dist, args.shots, seed)
        hist, bad = emission_histogram(dist, layout)
        _write_json(args.histogram, {"params": {"n_steps": p.n_steps, "g1": p.g1, "g2": p.g2,
                                                "g12": p.g12, "eps": p.eps},
                                     "emissions": {str(k): v for k, v in hist.items()},
                                     "unphysical": bad, "shots": args.shots})
    print(f"{p.n_steps}-step shower: {c.num_qubits} qubits, {len(c)} gates")
    return 0


def cmd_simulate(args) -> int:
    c = load_circuit(args.circuit)
    qubits = _ints(args.qubits) if args.qubits else list(range(c.num_qubits))
    dist = output_distribution(c, args.initial, qubits)
    if args.shots:
        dist = sample(dist, args.shots, args.seed if args.seed is not None else _default_seed())
    text = json.dumps(dict(sorted(dist.items())), indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _read_distribution(path) -> dict[str, float]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(d, dict) or not all(isinstance(v, (int, float)) for v in d.values()):
        raise UsageError(f"{path}: expected a {{bitstring: probability}} map")
    return {str(k): float(v) for k, v in d.items()}


def cmd_fidelity(args) -> int:
    p = _read_distribution(args.p)
    q = _read_distribution(args.q)
    print(f"{hellinger_fidelity(p, q):.6f}")
    return 0


# -- argument parsing ---------------------------------------------------------

def _add_optimizer_flags(sp) -> None:
    sp.add_argument("--circuit", required=True, help="circuit file, or qps1 / qps2")
    sp.add_argument("--initial", default=None, help="input basis bitstring (default all 0)")
    sp.add_argument("--threshold", type=_threshold, default=0.0)
    sp.add_argument("--backend", choices=("exact", "sampled"), default="exact")
    sp.add_argument("--shots", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=None, help="default: $AQCEL_SEED or 0")
    sp.add_argument("--v1", action="store_true", help="disable the label manager")
    sp.add_argument("--strict-labels", action="store_true",
                    help="diagonal gates send labels to Unknown")
    sp.add_argument("--bell-upgrade", action="store_true",
                    help="CX from a 0/1 control onto |0> opens a Bell group")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aqcel", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("optimize", help="optimize one circuit")
    _add_optimizer_flags(sp)
    sp.add_argument("--out", help="optimized circuit file")
    sp.add_argument("--report", help="report JSON file")
    sp.add_argument("--trace-labels", metavar="FILE", help="per-gate label trace JSON")
    sp.add_argument("--no-timing", action="store_true", help="omit timings from the report")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="optimize over a list of thresholds")
    _add_optimizer_flags(sp)
    sp.add_argument("--thresholds", type=_thresholds, required=True,
                    help="comma-separated list, e.g. 0,0.01,0.05")
    sp.add_argument("--seeds", type=_ints, default=None, help="comma-separated seeds")
    sp.add_argument("--both-modes", action="store_true", help="run with the label manager on and off")
    sp.add_argument("--qubits", help="qubits compared for fidelity (default: data qubits)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--csv")
    sp.add_argument("--json")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("qps", help="generate a parton-shower benchmark")
    sp.add_argument("--steps", type=int, choices=(1, 2), default=2)
    sp.add_argument("--g1", type=float, default=2.0)
    sp.add_argument("--g2", type=float, default=1.0)
    sp.add_argument("--g12", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=QPSParams.eps)
    sp.add_argument("--out")
    sp.add_argument("--layout")
    sp.add_argument("--angles")
    sp.add_argument("--histogram", help="noiseless emission histogram JSON")
    sp.add_argument("--shots", type=int, default=0, help="sample the histogram instead")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_qps)

    sp = sub.add_parser("simulate", help="noiseless output distribution")
    sp.add_argument("--circuit", required=True)
    sp.add_argument("--initial", default=None)
    sp.add_argument("--qubits", help="comma-separated qubits (default all)")
    sp.add_argument("--shots", type=int, default=0)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fidelity", help="Hellinger fidelity of two distribution files")
    sp.add_argument("p")
    sp.add_argument("q")
    sp.set_defaults(func=cmd_fidelity)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (CircuitError, UsageError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"aqcel {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
