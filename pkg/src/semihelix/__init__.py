"""Construction, certification and local reconstruction of semi-helix hypersurfaces."""

__version__ = "0.1.0"

from semihelix.construct import (  # noqa: E402
    SemiHelixSpec,
    build_product_surface,
    check_immersion_rank,
    immerse,
    verify_semihelix,
)
from semihelix.euclid import AngleWindow, Hyperplane  # noqa: E402
from semihelix.surface import ParamImmersion, SampleGrid, tangent_frame  # noqa: E402
