"""
Local reconstruction of a semi-helix as a circle sweep of a level slice.

Orientation convention used throughout: the normal is chosen so that the
angle increases along the integral curves of T (rate a = 1/r > 0). With that
choice the normal at a curve point equals (point - circle centre) / r, and
the decomposition p = q + 2r sin(theta_p/2) T_phi(q) holds with
eta(q) = -xi(q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import directed_hausdorff

from semihelix.construct import sweep_point, t_phi
from semihelix.curves import _initial_orientation, _normals, _rk4, fit_circle, trace_curves
from semihelix.errors import EmptySlice, FitFailure, SemiHelixError
from semihelix.euclid import Hyperplane, direction
from semihelix.surface import ParamImmersion, SampleGrid

Array = NDArray[np.float64]

ZERO_TOL = 1e-9
RESIDUAL_TOL = 1e-6
HEIGHT_TOL = 1e-8
HAUSDORFF_TOL = 1e-5


# -- slicing --------------------------------------------------------------------------


@dataclass
class SliceCurve:
    params: Array
    points: Array
    plane: Hyperplane
    tol: float


def slice_by_hyperplane(m: ParamImmersion, q: Hyperplane, grid: SampleGrid, tol: float = 1e-12) -> SliceCurve:
    """
    Roots of g(u) = <psi(u) - q.point, q.normal> along every grid line.

    Nodes with |g| <= tol are roots as they stand; each sign change between
    neighbouring nodes is bisected until |g| <= tol.

    Raises:
        EmptySlice: if the grid shows no root at all.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    nodes = grid.nodes()
    g = q.offset(m(nodes))
    roots = [nodes[np.abs(g) <= tol]]
    for ax in range(m.k):
        gu = np.moveaxis(g, ax, 0)
        nu = np.moveaxis(nodes, ax, 0)
        a_g, b_g = gu[:-1], gu[1:]
        hit = (a_g * b_g < 0) & (np.abs(a_g) > tol) & (np.abs(b_g) > tol)
        if not hit.any():
            continue
        lo, hi = nu[:-1][hit], nu[1:][hit]
        glo = a_g[hit]
        done = np.zeros(len(lo), dtype=bool)
        mid = 0.5 * (lo + hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = q.offset(m(mid))
            done |= np.abs(gm) <= tol
            if done.all():
                break
            left = (np.sign(gm) == np.sign(glo)) & ~done
            lo = np.where(left[:, None], mid, lo)
            glo = np.where(left, gm, glo)
            hi = np.where((~left & ~done)[:, None], mid, hi)
        roots.append(mid)
    params = np.concatenate([r.reshape(-1, m.k) for r in roots])
    if len(params) == 0:
        raise EmptySlice("hyperplane does not meet the sampled chart")
    return SliceCurve(params, m(params), q, tol)


# -- zero-angle points ----------------------------------------------------------------


@dataclass
class ZeroAnglePoint:
    p: Array
    theta_p: float
    q: Array
    eta_q: Array
    rate: float
    on_surface: bool
    u_q: Array | None = None
    fit_radius: float | None = None


def _oriented_start(m: ParamImmersion, U: Array, d: Array, h: float):
    """Normals at U oriented so the angle grows along T, plus the growth rate."""
    xi = _normals(m, U)
    xi = xi * _initial_orientation(m, U, xi, d)[:, None]
    fwd = _rk4(m, U, np.full(len(U), h), d)
    back = ~m.contains(fwd, tol=1e-12)
    if back.any():
        fwd[back] = _rk4(m, U[back], np.full(int(back.sum()), -h), d)
    xi1 = _normals(m, fwd)
    xi1 = xi1 * np.sign(np.einsum("ij,ij->i", xi1, xi))[:, None]
    theta = np.arcsin(np.clip(xi @ d, -1, 1))
    theta1 = np.arcsin(np.clip(xi1 @ d, -1, 1))
    rate = (theta1 - theta) / np.where(back, -h, h)
    flip = rate < 0
    xi[flip] *= -1
    theta[flip] *= -1
    return xi, theta, np.abs(rate)


def _auto_step(rate: Array, h: float | None) -> Array:
    # about 2e-3 rad of turning per step, never coarser than 1e-2
    base = np.where(rate > 1e-12, 2e-3 / np.maximum(rate, 1e-12), 1e-2)
    base = np.minimum(base, 1e-2)
    return base if h is None else np.minimum(base, h)


def zero_angle_points(m: ParamImmersion, U: ArrayLike, d: ArrayLike, h: float | None = None) -> list[ZeroAnglePoint]:
    """
    Batched `trace_to_zero_angle`.

    Each start integrates along -sign(theta) * T until the angle changes
    sign; the last step is then bisected to |theta| < 1e-9. Starts whose
    trace leaves the chart first get their zero-angle point from a circle
    fitted to a fine trace through the start point.
    """
    d = direction(d)
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    B = len(U)
    xi0, theta0, rate = _oriented_start(m, U, d, 1e-4)
    step = _auto_step(rate, h) * -np.sign(theta0)
    P = m(U)

    state = U.copy()
    xi = xi0.copy()
    theta = theta0.copy()
    active = np.abs(theta0) >= ZERO_TOL
    crossed = np.zeros(B, dtype=bool)
    exited = np.zeros(B, dtype=bool)
    max_steps = int(np.max(np.ceil(np.pi / np.maximum(rate, 1e-12) / np.abs(np.where(step == 0, 1, step))), initial=0))
    max_steps = min(max_steps + 10, 200_000)
    bracket_u = np.zeros_like(U)
    bracket_xi = np.zeros_like(xi0)
    bracket_h = np.zeros(B)

    for _ in range(max_steps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        nxt = _rk4(m, state[idx], step[idx], d)
        inside = m.contains(nxt, tol=1e-12)
        out = idx[~inside]
        exited[out] = True
        active[out] = False
        idx, nxt = idx[inside], nxt[inside]
        if not idx.size:
            continue
        raw = _normals(m, nxt)
        raw *= np.sign(np.einsum("ij,ij->i", raw, xi[idx]))[:, None]
        th = np.arcsin(np.clip(raw @ d, -1, 1))
        sign_change = np.sign(th) != np.sign(theta0[idx])
        small = np.abs(th) < ZERO_TOL
        hit = idx[sign_change & ~small]
        bracket_u[hit] = state[hit]
        bracket_xi[hit] = xi[hit]
        bracket_h[hit] = step[hit]
        crossed[hit] = True
        active[hit] = False
        # landed within tolerance without crossing: accept as is
        landed = idx[small]
        active[landed] = False
        state[idx] = nxt
        xi[idx] = raw
        theta[idx] = th

    # bisection on the fraction of the last step
    if crossed.any():
        ci = np.flatnonzero(crossed)
        lo = np.zeros(len(ci))
        hi = np.ones(len(ci))
        base_u, base_xi, hs = bracket_u[ci], bracket_xi[ci], bracket_h[ci]
        sgn0 = np.sign(theta0[ci])
        best_u = base_u.copy()
        best_xi = base_xi.copy()
        for _ in range(80):
            s = 0.5 * (lo + hi)
            us = _rk4(m, base_u, s * hs, d)
            ns = _normals(m, us)
            ns *= np.sign(np.einsum("ij,ij->i", ns, base_xi))[:, None]
            th = np.arcsin(np.clip(ns @ d, -1, 1))
            same = np.sign(th) == sgn0
            lo = np.where(same, s, lo)
            hi = np.where(same, hi, s)
            best_u, best_xi = us, ns
            if np.all(np.abs(th) < ZERO_TOL * 1e-2):
                break
        state[ci] = best_u
        xi[ci] = best_xi

    results = []
    for b in range(B):
        if exited[b]:
            results.append(_extend_by_circle(m, U[b], P[b], theta0[b], rate[b], d, h))
            continue
        uq = state[b]
        results.append(ZeroAnglePoint(
            p=P[b], theta_p=float(theta0[b]), q=m(uq), eta_q=-xi[b],
            rate=float(rate[b]), on_surface=True, u_q=uq,
        ))
    return results


def _fit_trace(m, u, d, rate, h=None, min_points=20):
    """Trace through `u` in both directions until it leaves the chart.

    About 0.01 rad of turning per step; refined when too few nodes result.
    """
    reach = np.pi / rate if rate > 1e-12 else 1.0
    step = 1e-2 / rate if rate > 1e-12 else 1e-2
    if h is not None:
        step = min(step, h)
    for _ in range(3):
        fwd = trace_curves(m, u[None], reach, step, d)[0]
        bwd = trace_curves(m, u[None], -reach, step, d)[0]
        pts = np.concatenate([bwd.points[::-1], fwd.points[1:]])
        if len(pts) >= min_points:
            break
        step /= 10
    return pts


def _extend_by_circle(m, u, p, theta_p, rate, d, h) -> ZeroAnglePoint:
    pts = _fit_trace(m, u, d, rate, h)
    try:
        fit = fit_circle(pts)
    except FitFailure as exc:
        raise FitFailure(f"cannot extend the integral curve beyond the chart: {exc}") from exc
    rel = p - fit.center
    w = rel - (rel @ d) * d
    w /= np.linalg.norm(w)
    q = fit.center + fit.radius * w
    return ZeroAnglePoint(p=p, theta_p=float(theta_p), q=q, eta_q=-w, rate=float(rate),
                          on_surface=False, fit_radius=fit.radius)


def trace_to_zero_angle(m: ParamImmersion, u: ArrayLike, d: ArrayLike, h: float | None = None) -> ZeroAnglePoint:
    """Zero-angle point q on the integral curve through psi(u), with theta at psi(u)."""
    return zero_angle_points(m, np.atleast_2d(u), d, h)[0]


def estimate_radius(m: ParamImmersion, u: ArrayLike, d: ArrayLike, h: float | None = None) -> float:
    """Radius of the circle fitted to the integral curve through psi(u)."""
    d = direction(d)
    U = np.atleast_2d(np.asarray(u, dtype=np.float64))
    _, _, rate = _oriented_start(m, U, d, 1e-4)
    pts = _fit_trace(m, U[0], d, float(rate[0]), h)
    return fit_circle(pts).radius


def verify_decomposition(p, q, r_hat: float, theta_p: float, eta_q, d) -> float:
    """|p - q - 2 r sin(theta_p/2) T_phi(q)|, signed-chord form."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    pred = 2.0 * r_hat * math.sin(theta_p / 2.0) * t_phi(eta_q, d, theta_p)
    return float(np.linalg.norm(p - q - pred))


# -- local reconstruction -------------------------------------------------------------


@dataclass
class NeighborSample:
    u: Array
    y: Array | None = None
    y_prime: Array | None = None
    theta: float | None = None
    residual: float | None = None
    on_surface: bool | None = None
    error: str | None = None


@dataclass
class ReconstructionReport:
    u_p: Array
    p: Array | None = None
    theta_p: float | None = None
    q: Array | None = None
    r_hat: float | None = None
    residual_p: float | None = None
    neighborhood: list = field(default_factory=list)
    height_spread: float | None = None
    translation_error: float | None = None
    hausdorff: float | None = None
    errors: list = field(default_factory=list)
    passed: bool = False

    def as_dict(self) -> dict:
        def vec(a):
            return None if a is None else [float(x) for x in np.ravel(a)]

        return {
            "passed": self.passed,
            "u_p": vec(self.u_p),
            "p": vec(self.p),
            "theta_p": self.theta_p,
            "q": vec(self.q),
            "r_hat": self.r_hat,
            "residual_p": self.residual_p,
            "height_spread": self.height_spread,
            "translation_error": self.translation_error,
            "hausdorff": self.hausdorff,
            "errors": list(self.errors),
            "neighborhood": [
                {
                    "u": vec(s.u), "y": vec(s.y), "y_prime": vec(s.y_prime),
                    "theta": s.theta, "residual": s.residual,
                    "on_surface": s.on_surface, "error": s.error,
                }
                for s in self.neighborhood
            ],
        }


def neighborhood_grid(m: ParamImmersion, u: ArrayLike, counts=5, frac: float = 0.1) -> SampleGrid:
    """Box of `frac` times each axis extent around u, clipped to the chart."""
    u = np.asarray(u, dtype=np.float64)
    half = 0.5 * frac * m.extent
    lo = np.maximum(u - half, m.lower)
    hi = np.minimum(u + half, m.upper)
    if np.isscalar(counts):
        counts = (int(counts),) * m.k
    return SampleGrid(lo, hi, tuple(counts))


def _zero_points_robust(m, U, d, h):
    try:
        return zero_angle_points(m, U, d, h), [None] * len(U)
    except SemiHelixError:
        out, errs = [], []
        for u in U:
            try:
                out.append(trace_to_zero_angle(m, u, d, h))
                errs.append(None)
            except SemiHelixError as exc:
                out.append(None)
                errs.append(f"{type(exc).__name__}: {exc}")
        return out, errs


def reconstruct_local(
    m: ParamImmersion,
    u_p: ArrayLike,
    d: ArrayLike,
    grid: SampleGrid | None = None,
    h: float | None = None,
    tol: float = RESIDUAL_TOL,
) -> ReconstructionReport:
    """
    Rebuild the chart near psi(u_p) as a circle sweep and measure the misfit.

    Every neighbourhood sample y is traced to its zero-angle point y'; the
    report holds the decomposition residual of each, the spread of the y'
    heights along d (they must share one hyperplane), the error of the
    height drop against r_hat*sin(theta_y), and the Hausdorff distance
    between the samples and the sweep rebuilt from (y', eta(y'), r_hat).
    Failures are recorded per point; the report never raises.
    """
    d = direction(d)
    u_p = np.asarray(u_p, dtype=np.float64)
    rep = ReconstructionReport(u_p=u_p)
    grid = grid if grid is not None else neighborhood_grid(m, u_p)

    try:
        rep.r_hat = estimate_radius(m, u_p, d, h)
        zp = trace_to_zero_angle(m, u_p, d, h)
        rep.p, rep.theta_p, rep.q = zp.p, zp.theta_p, zp.q
        rep.residual_p = verify_decomposition(zp.p, zp.q, rep.r_hat, zp.theta_p, zp.eta_q, d)
    except SemiHelixError as exc:
        rep.errors.append(f"p: {type(exc).__name__}: {exc}")
        rep.p = m(u_p)

    U = grid.nodes().reshape(-1, m.k)
    zs, errs = _zero_points_robust(m, U, d, h)
    good = []
    for u, z, err in zip(U, zs, errs):
        s = NeighborSample(u=u, y=m(u), error=err)
        if z is not None:
            s.y_prime, s.theta, s.on_surface = z.q, z.theta_p, z.on_surface
            if rep.r_hat is not None:
                s.residual = verify_decomposition(z.p, z.q, rep.r_hat, z.theta_p, z.eta_q, d)
            good.append(z)
        else:
            rep.errors.append(f"u={list(map(float, u))}: {err}")
        rep.neighborhood.append(s)

    if good and rep.r_hat is not None:
        heights = np.array([z.q @ d for z in good])
        rep.height_spread = float(heights.max() - heights.min())
        drops = np.array([(z.p - z.q) @ d - rep.r_hat * math.sin(z.theta_p) for z in good])
        rep.translation_error = float(np.max(np.abs(drops)))
        Y = np.array([z.p for z in good])
        base = np.array([z.q for z in good])
        etas = np.array([z.eta_q for z in good])
        thetas = np.array([z.theta_p for z in good])
        rebuilt = sweep_point(base[:, None, :], etas[:, None, :], d, rep.r_hat, thetas[None, :]).reshape(-1, len(d))
        rep.hausdorff = float(max(directed_hausdorff(Y, rebuilt)[0], directed_hausdorff(rebuilt, Y)[0]))

    residuals = [s.residual for s in rep.neighborhood]
    rep.passed = bool(
        not rep.errors
        and rep.residual_p is not None and rep.residual_p < tol
        and all(r is not None and r < tol for r in residuals)
        and rep.height_spread is not None and rep.height_spread < HEIGHT_TOL
        and rep.hausdorff is not None and rep.hausdorff < HAUSDORFF_TOL
    )
    return rep
