#!/usr/bin/env python3
"""Random-discriminant report: Gauss rules, the three discriminant-moment
routes, and the Sylvester decompositions for the Gaussian law."""

import argparse
import sys
from fractions import Fraction

from homsum.laws import gaussian
from homsum.orthopoly import (
    MomentFunctional,
    discriminant_moment,
    quadrature_rule,
    sylvester_decompose,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sigma2", default="1")
    ap.add_argument("--max-n", type=int, default=5)
    args = ap.parse_args()

    F = MomentFunctional.from_law(gaussian(Fraction(args.sigma2), 14))
    print("# Gauss rules")
    for n in range(2, args.max_n + 1):
        rule = quadrature_rule(F, n)
        pairs = ", ".join(f"({z.real:+.6f}, {w.real:.10f})" for z, w in zip(rule.nodes, rule.weights))
        print(f"  n={n}: residual={rule.max_residual:.2e}  (node, weight): {pairs}")

    print("# discriminant moments, three routes")
    for N, k in ((2, 1), (2, 2), (3, 1), (3, 2)):
        exp = discriminant_moment(F, N, k, "expansion")
        lug = discriminant_moment(F, N, k, "lu_gaussian")
        quad = discriminant_moment(F, N, k, "quadrature")
        print(f"  N={N} k={k}: expansion={exp}  lu_gaussian={lug}  quadrature={quad:.6f}")

    print("# Sylvester decompositions")
    for n in (2, 3):
        dec = sylvester_decompose(F, n, mode="appel")
        nw = ", ".join(f"({z.real:+.6f}, {w.real:+.6f})" for z, w in zip(dec.nodes, dec.weights))
        print(f"  appel n={n}: residual={dec.residual:.2e}  (node, weight): {nw}")
    dec = sylvester_decompose(F, 2, 2, mode="discriminant")
    print(f"  discriminant n=2 k=2: weight sum={dec.weight_sum.real:.8f} "
          f"target={dec.target}  residual={dec.residual:.2e}  consistent={dec.consistent}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
