"""
Parametric hypersurfaces, Jacobians and oriented tangent frames.

Evaluators are vectorised: they take parameter arrays of shape ``(..., k)``
and return points of shape ``(..., m)``. Analytic Jacobians, when supplied,
return ``(..., m, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from semihelix.errors import EvaluationFailure, OrientationConflict, RankDeficient
from semihelix.euclid import signed_angle

Array = NDArray[np.float64]
Evaluator = Callable[[Array], Array]

RANK_GATE = 1e-8
FD_BASE_STEP = np.finfo(np.float64).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class ParamImmersion:
    """
    A chart psi: box in R^k -> R^m.

    ``normal`` is an optional analytic unit normal. When present it fixes the
    orientation used for signed angles; otherwise orientation comes from the
    seed rule in `orient_normal_field`. ``angle_axis`` marks the domain axis
    that is the sweep angle of a constructed surface.
    """

    evaluator: Evaluator
    lower: Array
    upper: Array
    m: int
    jacobian_fn: Optional[Evaluator] = None
    jacobian_mode: str = "analytic"
    normal: Optional[Evaluator] = None
    normal_jacobian: Optional[Evaluator] = None
    angle_axis: Optional[int] = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("domain box must satisfy lower <= upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.jacobian_mode not in ("analytic", "fd"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")
        if self.jacobian_mode == "analytic" and self.jacobian_fn is None:
            object.__setattr__(self, "jacobian_mode", "fd")

    @property
    def k(self) -> int:
        return self.lower.shape[0]

    def __call__(self, u: ArrayLike) -> Array:
        return self.evaluator(np.asarray(u, dtype=np.float64))

    def with_fd(self) -> "ParamImmersion":
        return replace(self, jacobian_mode="fd")

    def contains(self, u: ArrayLike, tol: float = 0.0) -> NDArray[np.bool_]:
        u = np.asarray(u, dtype=np.float64)
        return np.all((u >= self.lower - tol) & (u <= self.upper + tol), axis=-1)

    @property
    def extent(self) -> Array:
        return self.upper - self.lower


@dataclass(frozen=True)
class SampleGrid:
    """Cell-centred tensor grid over a box: every node is strictly interior."""

    lower: Array
    upper: Array
    counts: tuple

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != lo.shape[0] or lo.shape != hi.shape:
            raise ValueError("counts must give one entry per domain axis")
        if any(c < 2 for c in counts):
            raise ValueError("need at least 2 samples per axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def over(cls, s: ParamImmersion, counts) -> "SampleGrid":
        if np.isscalar(counts):
            counts = (int(counts),) * s.k
        return cls(s.lower, s.upper, tuple(counts))

    @property
    def spacing(self) -> Array:
        return (self.upper - self.lower) / np.asarray(self.counts)

    def axes(self) -> list:
        return [
            lo + (np.arange(c) + 0.5) * (hi - lo) / c
            for lo, hi, c in zip(self.lower, self.upper, self.counts)
        ]

    def nodes(self) -> Array:
        """Array of shape ``counts + (k,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))


def _checked(values: Array, what: str) -> Array:
    if not np.all(np.isfinite(values)):
        raise EvaluationFailure(f"evaluator returned non-finite values at {what}")
    return values


def fd_jacobian(s: ParamImmersion, u: ArrayLike) -> Array:
    """
    Central-difference Jacobian, batched.

    Step per axis is cbrt(eps) * max(1, |u_j|). Nodes too close to the box
    boundary for a central stencil fall back to a one-sided one.
    """
    u = np.asarray(u, dtype=np.float64)
    cols = []
    for j in range(s.k):
        h = FD_BASE_STEP * np.maximum(1.0, np.abs(u[..., j]))
        lo, hi = s.lower[j], s.upper[j]
        up_ok = u[..., j] + h <= hi
        dn_ok = u[..., j] - h >= lo
        # central unless exactly one side is blocked; degenerate axes stay central
        fwd = up_ok & ~dn_ok
        bwd = dn_ok & ~up_ok
        plus = np.where(bwd, 0.0, h)
        minus = np.where(fwd, 0.0, h)
        up = u.copy()
        up[..., j] += plus
        dn = u.copy()
        dn[..., j] -= minus
        fp = _checked(s(up), "a stencil point")
        fm = _checked(s(dn), "a stencil point")
        cols.append((fp - fm) / (plus + minus)[..., None])
    return np.stack(cols, axis=-1)


def jacobian(s: ParamImmersion, u: ArrayLike) -> Array:
    """m x k Jacobian at `u` (batched over leading axes)."""
    u = np.asarray(u, dtype=np.float64)
    if s.jacobian_mode == "analytic":
        return _checked(s.jacobian_fn(u), "the query point")
    return fd_jacobian(s, u)


def cofactor_normal(J: Array) -> Array:
    """Generalised cross product of the k = m-1 columns of J, normalised.

    Smooth in J, so it gives a coherently oriented normal on any chart.
    """
    J = np.asarray(J, dtype=np.float64)
    m = J.shape[-2]
    comps = []
    for i in range(m):
        minor = np.delete(J, i, axis=-2)
        comps.append((-1.0) ** (i + m - 1) * np.linalg.det(minor))
    n = np.stack(comps, axis=-1)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


@dataclass
class TangentFrame:
    point: Array
    tangent_basis: Array  # (k, m), rows orthonormal
    xi: Array
    theta: float
    sigma_min: float
    sigma_max: float


@dataclass
class FrameField:
    """Frames at many parameter nodes; every array is indexed like `params`."""

    params: Array
    points: Array
    tangents: Array  # (..., k, m)
    normals: Array  # (..., m)
    theta: Array
    sigma_min: Array
    sigma_max: Array

    @property
    def rank_ok(self) -> NDArray[np.bool_]:
        return self.sigma_min > RANK_GATE * self.sigma_max


def raw_frames(s: ParamImmersion, u: ArrayLike, d: ArrayLike) -> FrameField:
    """SVD frames with unoriented normals (sign as returned by LAPACK)."""
    u = np.asarray(u, dtype=np.float64)
    if s.m != s.k + 1:
        raise ValueError("tangent frames are defined for hypersurfaces only (m = k + 1)")
    J = jacobian(s, u)
    U, S, _ = np.linalg.svd(J, full_matrices=True)
    tangents = np.swapaxes(U[..., :, : s.k], -1, -2)
    xi = U[..., :, s.k]
    d = np.asarray(d, dtype=np.float64)
    return FrameField(
        params=u,
        points=s(u),
        tangents=tangents,
        normals=xi,
        theta=np.arcsin(np.clip(xi @ d, -1.0, 1.0)),
        sigma_min=S[..., -1],
        sigma_max=S[..., 0],
    )


def _seed_sign(xi: Array, d: Array, tol: float = 1e-12) -> float:
    dot = float(xi @ d)
    if abs(dot) > tol:
        return 1.0 if dot > 0 else -1.0
    nz = np.flatnonzero(np.abs(xi) > tol)
    return 1.0 if xi[nz[0]] > 0 else -1.0


def _flip(field_: FrameField, sign, d: Array) -> FrameField:
    sign = np.asarray(sign, dtype=np.float64)
    normals = field_.normals * sign[..., None]
    return replace(field_, normals=normals, theta=np.arcsin(np.clip(normals @ d, -1.0, 1.0)))


def tangent_frame(s: ParamImmersion, u: ArrayLike, d: ArrayLike) -> TangentFrame:
    """
    Orthonormal tangent basis, unit normal and signed angle with `d` at `u`.

    The normal's sign follows the surface's analytic normal when it has one,
    else the seed rule (<xi, d> >= 0, ties broken by the first nonzero
    coordinate).

    Raises:
        RankDeficient: if sigma_min <= 1e-8 * sigma_max.
    """
    u = np.asarray(u, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    f = raw_frames(s, u, d)
    if not f.rank_ok:
        raise RankDeficient(
            f"Jacobian singular values {f.sigma_min:.3g} / {f.sigma_max:.3g} fail the rank gate at u={u}"
        )
    if s.normal is not None:
        sign = 1.0 if float(f.normals @ s.normal(u)) >= 0 else -1.0
    else:
        sign = _seed_sign(f.normals, d)
    xi = sign * f.normals
    return TangentFrame(
        point=f.points,
        tangent_basis=f.tangents,
        xi=xi,
        theta=signed_angle(d, xi),
        sigma_min=float(f.sigma_min),
        sigma_max=float(f.sigma_max),
    )


def orient_normal_field(
    s: ParamImmersion, grid: SampleGrid, d: ArrayLike, *, audit: bool = True
) -> FrameField:
    """
    Frames on every grid node with a coherent normal orientation.

    The seed node (index 0) takes its sign from the surface's analytic normal,
    or from the seed rule. Signs propagate along axis 0 from the seed, then
    along each later axis, and finally every grid adjacency is audited.

    Raises:
        OrientationConflict: if some pair of adjacent normals has
            non-positive inner product after propagation.
    """
    d = np.asarray(d, dtype=np.float64)
    f = raw_frames(s, grid.nodes(), d)
    xi = f.normals
    k = s.k
    sign = np.ones(xi.shape[:-1])

    seed_idx = (0,) * k
    seed = xi[seed_idx]
    if s.normal is not None:
        sign[seed_idx] = 1.0 if float(seed @ s.normal(f.params[seed_idx])) >= 0 else -1.0
    else:
        sign[seed_idx] = _seed_sign(seed, d)

    # propagate: axis 0 along the line through the seed, then fan out axis by axis
    for ax in range(k):
        sl = [0] * k
        for a in range(ax):
            sl[a] = slice(None)
        sl[ax] = slice(None)
        line_xi = xi[tuple(sl)]
        # move the propagation axis to the front
        line_xi = np.moveaxis(line_xi, ax, 0)
        steps = np.sign(np.einsum("i...j,i...j->i...", line_xi[1:], line_xi[:-1]))
        steps[steps == 0] = 1.0
        start = np.moveaxis(sign[tuple(sl)], ax, 0)[0]
        cum = np.concatenate([start[None], start[None] * np.cumprod(steps, axis=0)], axis=0)
        target = np.moveaxis(sign[tuple(sl)], ax, 0)
        target[...] = cum
        sign[tuple(sl)] = np.moveaxis(target, 0, ax)

    oriented = _flip(f, sign, d)
    if audit:
        for ax in range(k):
            a = np.take(oriented.normals, np.arange(1, grid.counts[ax]), axis=ax)
            b = np.take(oriented.normals, np.arange(0, grid.counts[ax] - 1), axis=ax)
            dots = np.einsum("...j,...j->...", a, b)
            if np.any(dots <= 0):
                bad = np.argwhere(dots <= 0)[0]
                raise OrientationConflict(
                    f"adjacent normals disagree along axis {ax} near node {tuple(int(i) for i in bad)}"
                )
    return oriented


def flip_orientation(field_: FrameField, d: ArrayLike) -> FrameField:
    return _flip(field_, -np.ones(field_.theta.shape), np.asarray(d, dtype=np.float64))
