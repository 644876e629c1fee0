"""c_N against well depth A, next to the limiting level c_inf; writes CSV to stdout."""
import argparse
import csv
import sys

import numpy as np

from logvar.energy import total_energy
from logvar.grid import Grid
from logvar.nehari import ground_state
from logvar.oracle import gausson_energy
from logvar.potential import PotentialSpec, bind


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--depths", type=float, nargs="+", default=list(np.round(np.linspace(0.0, 1.0, 11), 2)))
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--points", type=int, default=961)
    args = ap.parse_args()

    grid = Grid(1, 12.0, args.points)
    c_inf = gausson_energy(1)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["A", "c_N", "c_infinity", "gap", "iterations"])
    init = None
    for a in args.depths:
        pot = bind(PotentialSpec.gaussian_well(a, args.sigma), grid)
        u, rep = ground_state(pot, init=init)
        init = u  # warm start along the sweep
        c_n = total_energy(u, pot)
        w.writerow([a, repr(c_n), repr(c_inf), repr(c_inf - c_n), rep.iterations])


if __name__ == "__main__":
    main()
