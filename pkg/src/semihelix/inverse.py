"""Recover the axis d from an oriented point cloud (points with unit normals)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from semihelix.errors import InsufficientData, ValidationError
from semihelix.euclid import extend_orthonormal_basis

log = logging.getLogger(__name__)

Array = NDArray[np.float64]

MIN_SAMPLES = 10
TIE_TOL = 1e-9
STOP_TOL = 1e-10


@dataclass(frozen=True)
class OrientedPointCloud:
    points: Array
    normals: Array

    def __post_init__(self):
        P = np.asarray(self.points, dtype=np.float64)
        N = np.asarray(self.normals, dtype=np.float64)
        if P.ndim != 2 or P.shape != N.shape:
            raise ValidationError("points and normals must be equal-length lists of vectors")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(N))):
            raise ValidationError("cloud has non-finite entries")
        if np.max(np.abs(np.linalg.norm(N, axis=1) - 1.0), initial=0.0) > 1e-6:
            raise ValidationError("normals must be unit within 1e-6")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "normals", N)

    def __len__(self):
        return len(self.points)


@dataclass
class DirectionFit:
    d: Array
    theta0: float
    spread: float
    ambiguous: bool = False

    def as_dict(self) -> dict:
        return {
            "d": [float(x) for x in self.d],
            "theta0": float(self.theta0),
            "spread": float(self.spread),
            "ambiguous": self.ambiguous,
        }


def _angles(N, d):
    return np.arcsin(np.clip(N @ d, -1.0, 1.0))


def half_range(N: Array, d: Array) -> float:
    th = _angles(N, d)
    return 0.5 * float(th.max() - th.min())


def _refine(N, d, max_sweeps=200):
    """Coordinate descent on the sphere: 1-d bounded searches along great circles."""
    n = len(d)
    f = half_range(N, d)
    width = math.pi / 2
    for _ in range(max_sweeps):
        f_start = f
        biggest = 0.0
        for t in extend_orthonormal_basis([d], n)[1:]:
            def along(a, d=d, t=t):
                return half_range(N, math.cos(a) * d + math.sin(a) * t)

            res = optimize.minimize_scalar(along, bounds=(-width, width), method="bounded",
                                           options={"xatol": 1e-14})
            if res.fun < f:
                d = math.cos(res.x) * d + math.sin(res.x) * t
                d /= np.linalg.norm(d)
                f = res.fun
                biggest = max(biggest, abs(res.x))
        if f_start - f < STOP_TOL:
            break
        width = max(4 * biggest, 1e-6)
    return d, f


def _sign_normalized(d):
    nz = np.flatnonzero(np.abs(d) > 1e-12)
    return d if d[nz[0]] > 0 else -d


def fit_direction(cloud: OrientedPointCloud) -> DirectionFit:
    """
    Unit d minimising the half-range of arcsin<d, n_i> over the cloud.

    Starts from the smallest and largest eigenvectors of the normals' second
    moment matrix, refines each, keeps the best. Orthogonal candidates that
    tie within 1e-9 mark the result ambiguous (the first one is returned).

    Raises:
        InsufficientData: fewer than 10 samples.
    """
    if len(cloud) < MIN_SAMPLES:
        raise InsufficientData(f"need at least {MIN_SAMPLES} samples, got {len(cloud)}")
    N = cloud.normals
    M = N.T @ N / len(N)
    _, vecs = np.linalg.eigh(M)
    starts = [vecs[:, 0], vecs[:, -1]]
    fits = [_refine(N, _sign_normalized(v)) for v in starts]
    order = sorted(range(len(fits)), key=lambda i: fits[i][1])
    best_d, best_f = fits[order[0]]
    ambiguous = False
    for i in order[1:]:
        d_i, f_i = fits[i]
        if abs(f_i - best_f) <= TIE_TOL and abs(float(d_i @ best_d)) < 1 - 1e-6:
            ambiguous = True
            log.warning("AmbiguousAxis: candidates %s and %s tie at spread %.3g", best_d, d_i, best_f)
    d = _sign_normalized(best_d)
    th = _angles(N, d)
    return DirectionFit(d, 0.5 * float(th.max() + th.min()), 0.5 * float(th.max() - th.min()), ambiguous)
