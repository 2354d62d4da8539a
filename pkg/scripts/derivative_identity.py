"""Grade-by-grade comparison of three forms of d/dt exp*(tα) in exact arithmetic.

Forms compared against the true derivative of exp*(tα):
  right_star   exp*(tα) ∗ α
  grouplike    exp*(tα) · (exp*(tα) ⊳ α)
  dot_form     exp·(tα) · (exp·(tα) ⊳ α)

    python scripts/derivative_identity.py --alpha "a[]" --order 5
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from postlie import forest_algebra as fa
from postlie.trees import parse_forest


@dataclass
class IdentityConfig:
    alpha: str = "a[]"
    order: int = 5


def _parse_alpha(text: str) -> fa.ForestVector:
    out = fa.ForestVector()
    for part in text.split("+"):
        out = out + fa.vec(parse_forest(part.strip()))
    return out


def main(cfg: IdentityConfig) -> dict[str, list[bool]]:
    a = _parse_alpha(cfg.alpha)
    n = cfg.order
    G = fa.time_exp(a, n, "star")
    D = fa.time_exp(a, n, "dot")
    A = fa.time_constant(a)
    truth = fa.time_derivative(G)
    forms = {
        "right_star": fa.time_product(G, A, "star", n),
        "grouplike": fa.time_product(G, fa.time_product(G, A, "triangle", n), "dot", n),
        "dot_form": fa.time_product(D, fa.time_product(D, A, "triangle", n), "dot", n),
    }
    table = {}
    for name, P in forms.items():
        P = {k: v for k, v in P.items() if k < n}
        table[name] = [
            all((truth.get(k, fa.ForestVector()) - P.get(k, fa.ForestVector())).grade_component(g) == 0
                for k in range(n + 1))
            for g in range(n + 1)
        ]
        ok = "".join("✓" if x else "✗" for x in table[name])
        print(f"{name:<11} grades 0..{n}: {ok}")
        for k in sorted(set(truth) | set(P)):
            d = truth.get(k, fa.ForestVector()) - P.get(k, fa.ForestVector())
            if d:
                lowest = min(f.grade for f in d)
                print(f"    t^{k}: first mismatch at grade {lowest}: {fa.format_vector(d.grade_component(lowest))}")
                break
    return table


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", default="a[]", help="sum of forest codes, e.g. 'a[] + b[]'")
    ap.add_argument("--order", type=int, default=5)
    a = ap.parse_args()
    main(IdentityConfig(a.alpha, a.order))
