"""
How large can the sweep radius get before the sweep stops being an immersion?

For a unit circle base with inward normal the u-column of the Jacobian has
length |1 - r(1 - cos theta)|, so rank drops once r(1 - cos eps) reaches 1.
This script scans r and prints the smallest singular-value ratio found.

    python scripts/rank_sweep.py --eps 1.0472
"""

import argparse
import math

import numpy as np

from semihelix import presets
from semihelix.construct import SemiHelixSpec, build_product_surface, check_immersion_rank
from semihelix.euclid import AngleWindow
from semihelix.surface import SampleGrid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, default=math.pi / 3)
    ap.add_argument("--radii", default="0.5,1,1.5,1.9,2.1,3,5")
    args = ap.parse_args()

    base = presets.flipped(presets.circle(1.0))
    critical = 1.0 / (1.0 - math.cos(args.eps))
    print(f"eps={args.eps:.4f}  predicted critical radius {critical:.4f}")
    print(f"{'r':>6} {'sigma ratio':>12} {'theta at min':>13} {'below gate':>11}")
    for r in map(float, args.radii.split(",")):
        spec = SemiHelixSpec(base, r, AngleWindow(0.0, args.eps))
        s = build_product_surface(spec)
        rc = check_immersion_rank(s, SampleGrid.over(s, (64, 33)))
        print(f"{r:>6.2f} {rc.ratio:>12.3e} {float(np.asarray(rc.location)[-1]):>13.6f} {str(rc.below_gate):>11}")


if __name__ == "__main__":
    main()
