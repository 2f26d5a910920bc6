"""Two-qubit counts, measurements and fidelity for baseline, v1 and v2 on the QPS benchmarks.

    python3 scripts/table_counts.py --threshold 0.05
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from aqcel.circuit import two_qubit_count
from aqcel.optimizer import OptimizerConfig, baseline, optimize
from aqcel.qps import load_layout, load_qps
from aqcel.simulator import hellinger_fidelity, output_distribution


@dataclass(frozen=True)
class TableConfig:
    threshold: float = 0.05
    steps: tuple[int, ...] = (1, 2)
    backend: str = "exact"
    shots: int = 100_000
    seed: int = 0


def run(cfg: TableConfig) -> list[dict]:
    rows = []
    for n in cfg.steps:
        c = load_qps(n)
        qubits = load_layout(n).measured_qubits
        ref = output_distribution(c, None, qubits)
        rows.append({"circuit": f"qps{n}", "variant": "baseline",
                     "two_qubit": two_qubit_count(baseline(c)).lowered,
                     "measurements": 0, "fidelity": 1.0})
        for name, lm in (("v1", False), ("v2", True)):
            oc = OptimizerConfig(threshold=cfg.threshold, backend=cfg.backend, shots=cfg.shots,
                                 seed=cfg.seed, label_manager=lm)
            out, rep = optimize(c, cfg=oc)
            rows.append({"circuit": f"qps{n}", "variant": name,
                         "two_qubit": rep.two_qubit_after,
                         "measurements": rep.measurements_performed,
                         "fidelity": hellinger_fidelity(ref, output_distribution(out, None, qubits))})
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threshold", type=float, default=TableConfig.threshold)
    ap.add_argument("--backend", choices=("exact", "sampled"), default=TableConfig.backend)
    ap.add_argument("--shots", type=int, default=TableConfig.shots)
    ap.add_argument("--seed", type=int, default=TableConfig.seed)
    ap.add_argument("--json", help="write the rows here as well")
    args = ap.parse_args()
    cfg = TableConfig(args.threshold, (1, 2), args.backend, args.shots, args.seed)
    rows = run(cfg)
    print(f"threshold {cfg.threshold}, {cfg.backend} backend")
    print(f"{'circuit':<8} {'variant':<9} {'2q gates':>8} {'meas':>5} {'fidelity':>9}")
    for r in rows:
        print(f"{r['circuit']:<8} {r['variant']:<9} {r['two_qubit']:>8} {r['measurements']:>5}"
              f" {r['fidelity']:>9.4f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=1)


if __name__ == "__main__":
    main()
