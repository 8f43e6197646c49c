"""Frequency-side vs time-side resolvent integrals on random stable
generators, over a range of abscissae ``a``."""
import argparse

import numpy as np

from semistab.acceptance import random_stable_generator
from semistab.backends import MatrixGenerator, MatrixSemigroup
from semistab.resolvent import ResolventProbe, plancherel_check


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a", type=float, nargs="+", default=[1.0, 0.3, 0.1, 0.03])
    p.add_argument("--seed-imag", action="store_true", help="plant an eigenvalue on the imaginary axis")
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    print("inst " + " ".join(f"a={a:<8g}" for a in args.a))
    for i in range(args.instances):
        A, _ = random_stable_generator(rng, n=args.n, seed_imag=args.seed_imag)
        probe = ResolventProbe(MatrixSemigroup(MatrixGenerator(A)))
        x = rng.normal(size=args.n) + 1j * rng.normal(size=args.n)
        y = rng.normal(size=args.n) + 1j * rng.normal(size=args.n)
        errs = [plancherel_check(probe, x, y, a).rel_error for a in args.a]
        print(f"{i:>4} " + " ".join(f"{e:<10.2e}" for e in errs))


if __name__ == "__main__":
    main()
