"""Excited pairs of the harmonic problem by both strategies, with refinement drift."""
import argparse
import time

from logvar.grid import Grid
from logvar.multisol import build_scaffold, find_solutions
from logvar.potential import PotentialSpec, bind


def solve(grid, count, strategy):
    pot = bind(PotentialSpec.harmonic(), grid)
    start = time.perf_counter()
    sols = find_solutions(pot, build_scaffold(pot, max(8, count)), count, strategy=strategy)
    return sols, time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=4)
    ap.add_argument("--points", type=int, default=961)
    args = ap.parse_args()

    grid = Grid(1, 12.0, args.points)
    fine, _ = solve(grid.refined(), args.count, "symmetry")
    for strategy in ("symmetry", "deflation"):
        sols, secs = solve(grid, args.count, strategy)
        print(f"{strategy}: {len(sols.entries)} pairs in {secs:.2f} s" + (f" ({sols.warning})" if sols.warning else ""))
        for e, f in zip(sols.entries, fine.entries):
            drift = abs(e.total_J - f.total_J) / abs(f.total_J)
            print(f"  J = {e.total_J:12.5f}  nodes {e.nodal_count}  residual {e.residual_norm:.1e}"
                  f"  b_k {e.lower_bound:8.4f}  drift {drift:.1e}")


if __name__ == "__main__":
    main()
