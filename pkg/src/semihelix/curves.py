"""
Integral curves of the tangential part of d, and the circles they trace.

Curves are integrated in parameter space: the ambient unit field T is
pulled back through the Jacobian by least squares (via the SVD that also
yields the normal), so every iterate stays exactly on the chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from semihelix.errors import DegenerateGeometry, TangentDegenerate
from semihelix.euclid import extend_orthonormal_basis
from semihelix.surface import ParamImmersion, jacobian

Array = NDArray[np.float64]

TANGENT_TOL = 1e-10


def _field(m: ParamImmersion, U: Array, d: Array):
    """Return (du/dt, T, raw normal) at parameter nodes U of shape (B, k)."""
    J = jacobian(m, U)
    Uu, S, Vt = np.linalg.svd(J, full_matrices=True)
    xi = Uu[..., :, m.k]
    tang = d - (xi @ d)[..., None] * xi
    size = np.linalg.norm(tang, axis=-1)
    if np.any(size < TANGENT_TOL):
        raise TangentDegenerate("direction is normal to the surface (angle +-pi/2)")
    T = tang / size[..., None]
    coeff = np.einsum("...mk,...m->...k", Uu[..., :, : m.k], T) / S
    du = np.einsum("...jk,...j->...k", Vt, coeff)
    return du, T, xi


def t_theta_field(m: ParamImmersion, u: ArrayLike, d: ArrayLike) -> Array:
    """Unit tangential component of `d` at parameter `u`.

    Raises:
        TangentDegenerate: if |d - <d, xi> xi| < 1e-10.
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    _, T, _ = _field(m, u, np.asarray(d, dtype=np.float64))
    return T[0]


def _rk4(m, U, h, d):
    """One classical RK4 step for each row of U; h may differ per row."""
    h = np.asarray(h, dtype=np.float64)[..., None]
    k1 = _field(m, U, d)[0]
    k2 = _field(m, U + 0.5 * h * k1, d)[0]
    k3 = _field(m, U + 0.5 * h * k2, d)[0]
    k4 = _field(m, U + h * k3, d)[0]
    return U + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0


def _normals(m, U):
    J = jacobian(m, U)
    Uu = np.linalg.svd(J, full_matrices=True)[0]
    return Uu[..., :, m.k]


def _initial_orientation(m, U, xi, d):
    """Sign per row from the chart's analytic normal, else the seed rule."""
    if m.normal is not None:
        s = np.sign(np.einsum("...j,...j->...", xi, m.normal(U)))
    else:
        s = np.sign(xi @ d)
        for i in np.flatnonzero(np.abs(xi @ d) <= 1e-12):
            nz = np.flatnonzero(np.abs(xi[i]) > 1e-12)
            s[i] = np.sign(xi[i, nz[0]])
    s[s == 0] = 1.0
    return s


@dataclass
class IntegralCurve:
    t: Array
    params: Array
    points: Array
    angles: Array
    exit_reason: str | None = None

    def __len__(self):
        return len(self.t)


def trace_curves(m: ParamImmersion, U0: ArrayLike, t_span: float, h: float, d: ArrayLike) -> list[IntegralCurve]:
    """
    Trace integral curves from every row of `U0` over t in [0, t_span].

    A negative `t_span` integrates backwards. The step is the largest value
    not above `h` that divides the span evenly. A curve whose next node would
    leave the domain box stops there with ``exit_reason == "domain"``.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    d = np.asarray(d, dtype=np.float64)
    U = np.atleast_2d(np.asarray(U0, dtype=np.float64)).copy()
    B = U.shape[0]
    n_steps = int(math.ceil(abs(t_span) / h - 1e-9)) if t_span != 0 else 0
    step = t_span / n_steps if n_steps else 0.0

    xi = _normals(m, U)
    xi = xi * _initial_orientation(m, U, xi, d)[:, None]
    params = [U.copy()]
    normals = [xi]
    alive = np.ones(B, dtype=bool)
    length = np.ones(B, dtype=int)
    for _ in range(n_steps):
        if not alive.any():
            break
        idx = np.flatnonzero(alive)
        nxt = _rk4(m, U[idx], step, d)
        inside = m.contains(nxt, tol=1e-12)
        alive[idx[~inside]] = False
        idx, nxt = idx[inside], nxt[inside]
        U[idx] = nxt
        new_xi = normals[-1].copy()
        if idx.size:
            raw = _normals(m, nxt)
            sgn = np.sign(np.einsum("ij,ij->i", raw, new_xi[idx]))
            sgn[sgn == 0] = 1.0
            new_xi[idx] = raw * sgn[:, None]
        length[idx] += 1
        params.append(U.copy())
        normals.append(new_xi)

    P = np.stack(params)
    N = np.stack(normals)
    curves = []
    for b in range(B):
        L = length[b]
        pu = P[:L, b]
        ang = np.arcsin(np.clip(N[:L, b] @ d, -1.0, 1.0))
        curves.append(IntegralCurve(
            t=step * np.arange(L),
            params=pu,
            points=m(pu),
            angles=ang,
            exit_reason=None if L == n_steps + 1 else "domain",
        ))
    return curves


def trace_integral_curve(m: ParamImmersion, u0: ArrayLike, t_span: float, h: float, d: ArrayLike) -> IntegralCurve:
    return trace_curves(m, np.atleast_2d(u0), t_span, h, d)[0]


# -- closed form --------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormArc:
    """
    alpha(t) = ((1/a)cos(at+c) + c1) e1 + ((1/a)sin(at+c) + c2) e2 + sum c_i e_i.

    ``basis`` holds e1..en as rows; ``offsets`` holds c1..cn.
    """

    a: float
    c: float
    offsets: Array
    basis: Array

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("angular rate must be nonzero")
        B = np.asarray(self.basis, dtype=np.float64)
        if np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > 1e-10:
            raise ValueError("basis is not orthonormal")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=np.float64))

    @property
    def radius(self) -> float:
        return 1.0 / abs(self.a)

    @classmethod
    def from_construction(cls, x, eta, d, r, theta_start, t_start=0.0) -> "ClosedFormArc":
        """Arc of the sweep circle through base point x, parametrised by arclength.

        One global basis e1 = -eta, e2 = d serves both signs of theta.
        """
        basis = extend_orthonormal_basis([-np.asarray(eta, float), np.asarray(d, float)], len(d))
        a = 1.0 / r
        center = np.asarray(x, float) + r * np.asarray(eta, float)
        return cls(a, theta_start - a * t_start, basis @ center, basis)


def closed_form_arc_eval(arc: ClosedFormArc, t) -> Array:
    t = np.asarray(t, dtype=np.float64)
    phase = arc.a * t + arc.c
    coeffs = np.broadcast_to(arc.offsets, t.shape + arc.offsets.shape).copy()
    coeffs[..., 0] += np.cos(phase) / arc.a
    coeffs[..., 1] += np.sin(phase) / arc.a
    return coeffs @ arc.basis


# -- circle fitting -----------------------------------------------------------------


@dataclass
class CircleFit:
    center: Array
    radius: float
    plane: Array  # (2, n)
    planarity_rms: float
    radial_rms: float

    def as_dict(self) -> dict:
        return {
            "center": list(map(float, self.center)),
            "radius": float(self.radius),
            "plane": [list(map(float, v)) for v in self.plane],
            "planarity_rms": float(self.planarity_rms),
            "radial_rms": float(self.radial_rms),
        }


def fit_circle(points: ArrayLike) -> CircleFit:
    """
    Circle through points in R^n.

    Plane from the top two principal directions, then a Kasa algebraic fit in
    plane coordinates and a single Gauss-Newton step on geometric distance.

    Raises:
        DegenerateGeometry: fewer than 4 points, or the points are collinear
            or coincident (second principal value <= 1e-10 * first).
    """
    P = np.asarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 4:
        raise DegenerateGeometry("need at least 4 points")
    centroid = P.mean(axis=0)
    X = P - centroid
    _, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[0] == 0 or s[1] <= 1e-10 * s[0]:
        raise DegenerateGeometry("points are collinear or coincident")
    plane = Vt[:2]
    xy = X @ plane.T
    off_plane = X - xy @ plane
    planarity = float(np.sqrt(np.mean(np.sum(off_plane**2, axis=1))))

    A = np.column_stack([2 * xy, np.ones(len(xy))])
    b = np.sum(xy**2, axis=1)
    (cx, cy, c0), *_ = np.linalg.lstsq(A, b, rcond=None)
    R = math.sqrt(c0 + cx**2 + cy**2)

    # one Gauss-Newton step on r_i = |p_i - c| - R
    diff = xy - np.array([cx, cy])
    dist = np.linalg.norm(diff, axis=1)
    res = dist - R
    Jg = np.column_stack([-diff / dist[:, None], -np.ones(len(xy))])
    delta, *_ = np.linalg.lstsq(Jg, -res, rcond=None)
    cx, cy, R = cx + delta[0], cy + delta[1], R + delta[2]

    c2 = np.array([cx, cy])
    radial = float(np.sqrt(np.mean((np.linalg.norm(xy - c2, axis=1) - R) ** 2)))
    return CircleFit(centroid + c2 @ plane, float(R), plane, planarity, radial)


def theta_linearity(curve: IntegralCurve) -> tuple[float, float, float]:
    """Least-squares line theta = a*t + c; returns (a, c, max |residual|)."""
    if len(curve) < 3:
        raise ValueError("need at least 3 nodes")
    a, c = np.polyfit(curve.t, curve.angles, 1)
    resid = float(np.max(np.abs(curve.angles - (a * curve.t + c))))
    return float(a), float(c), resid
