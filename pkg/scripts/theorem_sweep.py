"""Axiom residuals of the extended-field post-Lie structure over many seeded configurations.

    python scripts/theorem_sweep.py --samples 200 --seeds 0 1 2
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import dataclass, field

from postlie.verify import theorem1_sweep


@dataclass
class SweepConfig:
    samples: int = 100
    seeds: list[int] = field(default_factory=lambda: [0])
    targets: list[tuple[str, int]] = field(default_factory=lambda: [("sphere", 2), ("sphere", 3), ("so3", 3)])


def main(cfg: SweepConfig) -> list[dict]:
    out = []
    for seed in cfg.seeds:
        for backend, m in cfg.targets:
            t0 = time.perf_counter()
            r = theorem1_sweep(backend, m, cfg.samples, seed)
            r.update(seed=seed, m=m, seconds=round(time.perf_counter() - t0, 2))
            out.append(r)
            worst = max(r["max_residuals"].values())
            print(f"seed {seed}  {backend}({m})  worst residual {worst:.2e}  [{r['seconds']}s]")
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--json", action="store_true", help="print the full results as JSON")
    a = ap.parse_args()
    res = main(SweepConfig(samples=a.samples, seeds=a.seeds))
    if a.json:
        print(json.dumps(res, indent=2))
