"""The standard preset suite: 3 planar bases x 2 radii x 2 angle windows (n = 3)."""

from __future__ import annotations

import itertools
import math

from semihelix import presets
from semihelix.construct import SemiHelixSpec
from semihelix.euclid import AngleWindow

BASES = {
    "line": lambda: presets.plane(2),
    "circle": lambda: presets.circle(1.0),
    "graph": lambda: presets.graph(0.3, 2),
}
RADII = (1.0, 0.25)
WINDOWS = (
    AngleWindow(0.0, math.pi / 6),
    # excludes theta = 0, so reconstruction has to leave the chart
    AngleWindow(math.pi / 12, math.pi / 24),
)


def preset_suite():
    """Yield (label, spec) for every combination, in a fixed order."""
    for (name, make), r, w in itertools.product(BASES.items(), RADII, WINDOWS):
        label = f"{name}-r{r:g}-t{w.theta0:.3f}-e{w.epsilon:.3f}"
        yield label, SemiHelixSpec(make(), r, w)
