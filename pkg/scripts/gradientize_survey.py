#!/usr/bin/env python3
"""Survey constant gradientization over random linear fields: how often
does a real-spectrum Jacobian admit a symmetrizing change of basis, and
how tight is the transformed asymmetry when it does?

Example:
    python3 scripts/gradientize_survey.py --dim 3 --trials 200
"""
import argparse
import collections

import numpy as np

from gradiform import ConstantVerdict, solve_symmetrizer


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    verdicts = collections.Counter()
    worst_asym = 0.0
    real_spectrum = 0
    for _ in range(args.trials):
        J = rng.standard_normal((args.dim, args.dim))
        lam = np.linalg.eigvals(J)
        if np.max(np.abs(lam.imag)) < 1e-12:
            real_spectrum += 1
        rep = solve_symmetrizer(J)
        verdicts[rep.verdict.value] += 1
        if rep.verdict is ConstantVerdict.GRADIENTIZED:
            worst_asym = max(worst_asym, rep.transformed_asymmetry)

    print(f"{args.trials} random {args.dim}x{args.dim} Jacobians "
          f"({real_spectrum} with real spectrum)")
    for verdict, n in verdicts.most_common():
        print(f"  {verdict}: {n}")
    if worst_asym:
        print(f"worst transformed asymmetry among successes: "
              f"{worst_asym:.3e}")


if __name__ == "__main__":
    main()
