"""Ground state for a constant or Gaussian-well potential; prints the level comparison."""
import argparse
import json

from logvar.energy import evaluate
from logvar.grid import Grid, default_half_width, default_points
from logvar.nehari import ground_state, levels_for
from logvar.potential import PotentialSpec, bind


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--depth", type=float, default=0.5, help="well depth A (0 gives V = V_inf)")
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--v-inf", type=float, default=0.0)
    ap.add_argument("--points", type=int)
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()

    grid = Grid(args.dim, default_half_width(args.dim), args.points or default_points(args.dim))
    spec = PotentialSpec.gaussian_well(args.depth, args.sigma, args.v_inf)
    pot = bind(spec, grid)
    u, report = ground_state(pot, tol=args.tol)
    levels = levels_for(spec, grid, tol=args.tol, ground=u)
    print(json.dumps({"iterations": report.iterations, "seconds": report.wall_time_seconds,
                      "energy": evaluate(u, pot).to_json(), "levels": levels.to_json()}, indent=2))


if __name__ == "__main__":
    main()
