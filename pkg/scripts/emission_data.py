"""Emission-count histograms for plotting: g12 = 0 and 1, original and optimized circuits.

    python3 scripts/emission_data.py --threshold 0.05 --out emissions.json
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from aqcel.optimizer import OptimizerConfig, optimize
from aqcel.qps import ParticleLayout, QPSParams, build_qps, emission_histogram
from aqcel.simulator import output_distribution, sample


@dataclass(frozen=True)
class EmissionConfig:
    steps: int = 2
    couplings: tuple[float, ...] = (0.0, 1.0)
    threshold: float = 0.05
    shots: int = 0  # 0: exact probabilities
    seed: int = 0


def run(cfg: EmissionConfig) -> dict:
    layout = ParticleLayout.for_steps(cfg.steps)
    out = {"config": asdict(cfg), "series": []}
    for g12 in cfg.couplings:
        c = build_qps(QPSParams(n_steps=cfg.steps, g12=g12))
        opt, rep = optimize(c, cfg=OptimizerConfig(threshold=cfg.threshold))
        for name, circ in (("original", c), ("optimized", opt)):
            d = output_distribution(circ, None, layout.measured_qubits)
            if cfg.shots:
                d = sample(d, cfg.shots, cfg.seed)
            hist, bad = emission_histogram(d, layout)
            out["series"].append({"g12": g12, "circuit": name, "unphysical": bad,
                                  "emissions": {str(k): v for k, v in hist.items()},
                                  "two_qubit": (rep.two_qubit_before if name == "original"
                                                else rep.two_qubit_after)})
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, choices=(1, 2), default=EmissionConfig.steps)
    ap.add_argument("--threshold", type=float, default=EmissionConfig.threshold)
    ap.add_argument("--shots", type=int, default=EmissionConfig.shots)
    ap.add_argument("--seed", type=int, default=EmissionConfig.seed)
    ap.add_argument("--out", help="JSON file (default: stdout)")
    args = ap.parse_args()
    data = run(EmissionConfig(args.steps, (0.0, 1.0), args.threshold, args.shots, args.seed))
    text = json.dumps(data, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        for s in data["series"]:
            print(f"g12={s['g12']} {s['circuit']:<9} " +
                  " ".join(f"{k}:{v:.4f}" for k, v in s["emissions"].items()))
    else:
        print(text)


if __name__ == "__main__":
    main()
