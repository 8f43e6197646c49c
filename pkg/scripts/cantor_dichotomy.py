"""Cantor vs Lebesgue spectral measures: Cesàro means, trailing suprema and
probe values of the Fourier transform over growing horizons."""
import argparse
import math

import numpy as np

from semistab.backends import DiscreteMeasure
from semistab.core import Signal, TimeGrid, running_mean
from semistab.diagnostics import density_one_extract
from semistab.measures import cantor_probe_floor, cantor_probe_times, fourier_transform


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--horizons", type=float, nargs="+", default=[1e2, 1e3, 1e4])
    args = p.parse_args()

    measures = {"cantor": DiscreteMeasure.cantor(args.depth), "lebesgue": DiscreteMeasure.lebesgue(0, 1, 10_000)}
    print(f"{'measure':<9} {'T':>8} {'cesaro':>9} {'tail sup':>9}   density verdict")
    for name, mu in measures.items():
        for T in args.horizons:
            grid = TimeGrid.from_horizon(T, args.dt)
            s = Signal(grid, np.abs(fourier_transform(mu, grid.times)).astype(complex))
            rm = running_mean(s).values.real[-1]
            tail = float(np.abs(s.values[grid.times >= 0.9 * T]).max())
            dens = density_one_extract(s).verdict
            print(f"{name:<9} {T:>8g} {rm:>9.4f} {tail:>9.4f}   {dens}")
    mu = measures["cantor"]
    print(f"\nprobe floor prod |cos(2 pi / 3^m)| = {cantor_probe_floor():.10f}")
    for t in cantor_probe_times(8):
        print(f"  t = 2 pi 3^{round(math.log(t / (2 * math.pi), 3))}: |F mu| = {abs(fourier_transform(mu, t)):.10f}")


if __name__ == "__main__":
    main()
