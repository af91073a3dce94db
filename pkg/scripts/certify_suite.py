"""Certify every preset-suite surface with analytic and finite-difference Jacobians.

    python scripts/certify_suite.py --grid 128,65
"""

import argparse
import time

from semihelix.construct import build_product_surface, verify_semihelix
from semihelix.suite import preset_suite
from semihelix.surface import SampleGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="128,65")
    args = ap.parse_args()
    counts = tuple(int(c) for c in args.grid.split(","))

    print(f"{'spec':<28} {'mode':<4} {'angle min':>11} {'angle max':>11} {'margin':>9} {'|theta-param|':>13}  ok")
    t0 = time.perf_counter()
    for label, spec in preset_suite():
        s = build_product_surface(spec)
        grid = SampleGrid.over(s, counts)
        for mode, chart in (("an", s), ("fd", s.with_fd())):
            rep = verify_semihelix(chart, spec.d, spec.window, grid)
            print(f"{label:<28} {mode:<4} {rep.angle_min:>11.6f} {rep.angle_max:>11.6f} "
                  f"{rep.worst_margin:>9.2e} {rep.max_param_error:>13.2e}  {rep.passed}")
    print(f"total {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
