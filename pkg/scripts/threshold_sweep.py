"""Threshold sweep on a QPS benchmark with the label manager on and off.

Writes one CSV row per (threshold, mode, seed): two-qubit count, measurements
and fidelity against the noiseless original.

    python3 scripts/threshold_sweep.py --steps 2 --csv sweep.csv
    python3 scripts/threshold_sweep.py --steps 1 --backend sampled --shots 10000 --seeds 1,2,3
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

from aqcel.cli import summarize
from aqcel.optimizer import OptimizerConfig, optimize
from aqcel.qps import load_layout, load_qps
from aqcel.simulator import hellinger_fidelity, output_distribution


@dataclass(frozen=True)
class SweepConfig:
    steps: int = 2
    thresholds: tuple[float, ...] = (0.0, 0.01, 0.05, 0.1, 0.15, 0.2, 0.3)
    seeds: tuple[int, ...] = (0,)
    backend: str = "exact"
    shots: int = 100_000


def run(cfg: SweepConfig) -> list[dict]:
    c = load_qps(cfg.steps)
    qubits = load_layout(cfg.steps).measured_qubits
    ref = output_distribution(c, None, qubits)
    rows = []
    for lm in (True, False):
        for th in cfg.thresholds:
            for seed in cfg.seeds:
                oc = OptimizerConfig(threshold=th, backend=cfg.backend, shots=cfg.shots, seed=seed,
                                     label_manager=lm)
                out, rep = optimize(c, cfg=oc)
                rows.append({"threshold": th, "label_manager": lm, "seed": seed,
                             "two_qubit_after": rep.two_qubit_after,
                             "measurements_performed": rep.measurements_performed,
                             "fidelity": hellinger_fidelity(
                                 ref, output_distribution(out, None, qubits))})
    return rows


def _floats(text):
    return tuple(float(t) for t in text.split(","))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, choices=(1, 2), default=SweepConfig.steps)
    ap.add_argument("--thresholds", type=_floats, default=SweepConfig.thresholds)
    ap.add_argument("--seeds", type=lambda s: tuple(int(t) for t in s.split(",")),
                    default=SweepConfig.seeds)
    ap.add_argument("--backend", choices=("exact", "sampled"), default=SweepConfig.backend)
    ap.add_argument("--shots", type=int, default=SweepConfig.shots)
    ap.add_argument("--csv", help="output file (default: stdout)")
    args = ap.parse_args()
    rows = run(SweepConfig(args.steps, args.thresholds, args.seeds, args.backend, args.shots))
    fh = open(args.csv, "w", newline="", encoding="utf-8") if args.csv else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.csv:
        fh.close()
        for s in summarize(rows):
            print(f"{'v2' if s['label_manager'] else 'v1'} threshold={s['threshold']:<5g}"
                  f" 2q={s['two_qubit_after_mean']:<6g} meas={s['measurements_mean']:<5g}"
                  f" fidelity={s['fidelity_mean']:.4f} rms={s['fidelity_rms']:.2g}")


if __name__ == "__main__":
    main()
