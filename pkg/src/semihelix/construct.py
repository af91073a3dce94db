"""
Circle-sweep construction of semi-helix hypersurfaces and their certification.

A base hypersurface H of R^(n-1), with unit normal eta, is placed in R^n at
height 0 along d = e_n. Each base point x is swept along the circle of
radius r centred at x + r*eta(x) lying in the plane span{eta(x), d}; the
sweep coordinate theta is exactly the angle the resulting surface makes
with d.

We use the signed chord 2r*sin(theta/2) in place of r*sqrt(2(1 - cos theta)).
The two agree for theta >= 0; the signed one is smooth through theta = 0
and keeps negative angles on the same circle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from semihelix.errors import OrientationConflict, ValidationError, WindowViolation
from semihelix.euclid import AngleWindow, axis, direction
from semihelix.surface import (
    RANK_GATE,
    ParamImmersion,
    SampleGrid,
    cofactor_normal,
    fd_jacobian,
    flip_orientation,
    jacobian,
    orient_normal_field,
)

Array = NDArray[np.float64]


# -- frame fields on the sweep plane -------------------------------------------------


def _th(theta):
    return np.asarray(theta, dtype=np.float64)[..., None]


def t_theta(eta: ArrayLike, d: ArrayLike, theta) -> Array:
    """Unit tangent sin(theta)*eta + cos(theta)*d."""
    th = _th(theta)
    return np.sin(th) * np.asarray(eta) + np.cos(th) * np.asarray(d)


def t_phi(eta: ArrayLike, d: ArrayLike, theta) -> Array:
    """cos(phi)*eta + sin(phi)*d with phi = (pi - theta)/2: the chord direction."""
    phi = (np.pi - _th(theta)) / 2.0
    return np.cos(phi) * np.asarray(eta) + np.sin(phi) * np.asarray(d)


def xi_theta(eta: ArrayLike, d: ArrayLike, theta) -> Array:
    """Unit normal -cos(theta)*eta + sin(theta)*d of the swept surface."""
    th = _th(theta)
    return -np.cos(th) * np.asarray(eta) + np.sin(th) * np.asarray(d)


def chord(eta: ArrayLike, d: ArrayLike, r: float, theta) -> Array:
    """Signed chord 2r*sin(theta/2)*T_phi from the base point to the swept point."""
    return 2.0 * r * np.sin(_th(theta) / 2.0) * t_phi(eta, d, theta)


def sweep_point(x: ArrayLike, eta: ArrayLike, d: ArrayLike, r: float, theta) -> Array:
    return np.asarray(x, dtype=np.float64) + chord(eta, d, r, theta)


# -- construction input ---------------------------------------------------------------


def _embed(a: Array) -> Array:
    return np.concatenate([a, np.zeros(a.shape[:-1] + (1,))], axis=-1)


@dataclass(frozen=True)
class SemiHelixSpec:
    """
    Everything the sweep needs: base chart in R^(n-1), radius, angle window
    and direction (default e_n).

    The base normal is the chart's analytic normal when it has one, else the
    cofactor normal of its Jacobian (smooth, hence coherently oriented).
    """

    base: ParamImmersion
    r: float
    window: AngleWindow
    d: Array = field(default=None)

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r > 0):
            raise ValidationError(f"sweep radius must be positive, got {self.r!r}")
        if self.base.m != self.base.k + 1:
            raise ValidationError("base must be a hypersurface of R^(n-1)")
        n = self.base.m + 1
        d = axis(n) if self.d is None else direction(self.d)
        if d.shape != (n,):
            raise ValidationError(f"direction must live in R^{n}")
        object.__setattr__(self, "d", d)
        probe = SampleGrid.over(self.base, 3).nodes().reshape(-1, self.base.k)
        if np.max(np.abs(self.eta(probe) @ d)) > 1e-12:
            raise ValidationError("base normal field is not orthogonal to the direction")

    @property
    def n(self) -> int:
        return self.base.m + 1

    def base_point(self, u: ArrayLike) -> Array:
        return _embed(self.base(u))

    def eta(self, u: ArrayLike) -> Array:
        u = np.asarray(u, dtype=np.float64)
        if self.base.normal is not None:
            return _embed(self.base.normal(u))
        return _embed(cofactor_normal(jacobian(self.base, u)))

    def eta_jacobian(self, u: ArrayLike) -> Array:
        u = np.asarray(u, dtype=np.float64)
        if self.base.normal is not None and self.base.normal_jacobian is not None:
            J = self.base.normal_jacobian(u)
        else:
            eta_chart = ParamImmersion(
                lambda v: self.eta(v)[..., :-1], self.base.lower, self.base.upper, self.base.m
            )
            J = fd_jacobian(eta_chart, u)
        return np.concatenate([J, np.zeros(J.shape[:-2] + (1, J.shape[-1]))], axis=-2)


def immerse(spec: SemiHelixSpec, u: ArrayLike, theta) -> Array:
    """
    Swept point for base parameter `u` at angle `theta`.

    Raises:
        WindowViolation: if theta is outside the open window (for a helix
            window, outside theta0 +- 1e-9).
    """
    theta = np.asarray(theta, dtype=np.float64)
    if not np.all(spec.window.contains(theta)):
        raise WindowViolation(
            f"theta outside ({spec.window.lower!r}, {spec.window.upper!r})"
        )
    return sweep_point(spec.base_point(u), spec.eta(u), spec.d, spec.r, theta)


def build_product_surface(spec: SemiHelixSpec) -> ParamImmersion:
    """Chart (u, theta) -> swept point over base box x [theta0 - eps, theta0 + eps]."""
    k = spec.base.k
    d, r = spec.d, spec.r

    def split(U):
        U = np.asarray(U, dtype=np.float64)
        return U[..., :k], U[..., k]

    def ev(U):
        u, th = split(U)
        return sweep_point(spec.base_point(u), spec.eta(u), d, r, th)

    def jac(U):
        u, th = split(U)
        Jx = jacobian(spec.base, u)
        Jx = np.concatenate([Jx, np.zeros(Jx.shape[:-2] + (1, k))], axis=-2)
        Ju = Jx + (r * (1.0 - np.cos(th)))[..., None, None] * spec.eta_jacobian(u)
        Jt = r * t_theta(spec.eta(u), d, th)
        return np.concatenate([Ju, Jt[..., None]], axis=-1)

    def nrm(U):
        u, th = split(U)
        return xi_theta(spec.eta(u), d, th)

    lower = np.append(spec.base.lower, spec.window.lower)
    upper = np.append(spec.base.upper, spec.window.upper)
    return ParamImmersion(
        ev, lower, upper, spec.n, jacobian_fn=jac,
        jacobian_mode=spec.base.jacobian_mode, normal=nrm, angle_axis=k,
        name=f"semihelix[{spec.base.name}]",
        params={"r": r, "theta0": spec.window.theta0, "epsilon": spec.window.epsilon},
    )


# -- certification --------------------------------------------------------------------


@dataclass
class VerificationReport:
    angle_min: float
    angle_max: float
    worst_margin: float
    max_param_error: float | None
    sigma_min: float
    sigma_min_at: list
    rank_deficient: list
    n_nodes: int
    window: AngleWindow
    orientation: str
    passed: bool
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "theta0": self.window.theta0,
            "epsilon": self.window.epsilon,
            "angle_min": self.angle_min,
            "angle_max": self.angle_max,
            "worst_margin": self.worst_margin,
            "max_param_error": self.max_param_error,
            "sigma_min": self.sigma_min,
            "sigma_min_at": list(self.sigma_min_at),
            "rank_deficient": [list(u) for u in self.rank_deficient],
            "n_nodes": self.n_nodes,
            "orientation": self.orientation,
            "message": self.message,
        }


def verify_semihelix(
    m: ParamImmersion, d: ArrayLike, window: AngleWindow, grid: SampleGrid
) -> VerificationReport:
    """
    Certify the angle window from SVD frames alone.

    Angles come from `orient_normal_field`; no construction parameter enters
    except, for constructed charts, the comparison column reported as
    ``max_param_error``. Charts without an analytic normal have no preferred
    orientation, so both global signs are tried and the better one is kept.
    """
    d = direction(d)
    try:
        f = orient_normal_field(m, grid, d)
    except OrientationConflict as exc:
        return VerificationReport(np.nan, np.nan, -np.inf, None, np.nan, [], [], grid.size,
                                  window, "conflict", False, str(exc))
    orientation = "analytic" if m.normal is not None else "seed"
    if m.normal is None:
        flipped = flip_orientation(f, d)
        if np.min(window.margin(flipped.theta)) > np.min(window.margin(f.theta)):
            f, orientation = flipped, "seed-flipped"

    theta = f.theta
    margins = window.margin(theta)
    ok_rank = f.rank_ok
    bad_nodes = [tuple(float(x) for x in u) for u in f.params[~ok_rank]]
    flat = np.argmin(f.sigma_min)
    at = np.unravel_index(flat, f.sigma_min.shape)
    param_err = None
    if m.angle_axis is not None:
        param_err = float(np.max(np.abs(theta - f.params[..., m.angle_axis])))
    inside = bool(np.all(window.contains(theta)))
    passed = inside and not bad_nodes
    msg = []
    if not inside:
        msg.append(f"{int(np.sum(~window.contains(theta)))} node(s) outside the window")
    if bad_nodes:
        msg.append(f"{len(bad_nodes)} rank-deficient node(s)")
    return VerificationReport(
        angle_min=float(theta.min()),
        angle_max=float(theta.max()),
        worst_margin=float(margins.min()),
        max_param_error=param_err,
        sigma_min=float(f.sigma_min[at]),
        sigma_min_at=[float(x) for x in f.params[at]],
        rank_deficient=bad_nodes,
        n_nodes=grid.size,
        window=window,
        orientation=orientation,
        passed=passed,
        message="; ".join(msg),
    )


@dataclass
class RankCheck:
    sigma_min: float
    ratio: float
    location: Array
    grid_sigma_min: float
    grid_location: Array

    @property
    def below_gate(self) -> bool:
        return self.ratio <= RANK_GATE


def _singular_values(m: ParamImmersion, u) -> Array:
    return np.linalg.svd(jacobian(m, u), compute_uv=False)


def check_immersion_rank(m: ParamImmersion, grid: SampleGrid, refine: bool = True) -> RankCheck:
    """
    Smallest Jacobian singular value over the grid and where it occurs.

    With ``refine`` the grid minimiser is polished by a bounded Nelder-Mead
    search, so a rank drop between nodes is located instead of being
    under-reported by the grid spacing.
    """
    nodes = grid.nodes()
    S = _singular_values(m, nodes)
    smin = S[..., -1]
    idx = np.unravel_index(np.argmin(smin), smin.shape)
    u0 = nodes[idx]
    best_u, best_s = u0, float(smin[idx])
    best_ratio = best_s / float(S[idx][0])
    if refine:
        def objective(u):
            sv = _singular_values(m, u)
            return sv[-1]

        res = optimize.minimize(
            objective, u0, method="Nelder-Mead",
            bounds=list(zip(m.lower, m.upper)),
            options={"xatol": 1e-14, "fatol": 1e-16, "maxiter": 4000},
        )
        if res.fun < best_s:
            best_u = np.asarray(res.x)
            sv = _singular_values(m, best_u)
            best_s, best_ratio = float(sv[-1]), float(sv[-1] / sv[0])
    return RankCheck(best_s, best_ratio, np.asarray(best_u), float(smin[idx]), u0)


def frame_samples(spec: SemiHelixSpec, u: ArrayLike, theta) -> tuple[Array, Array, Array]:
    """(T_theta, T_phi, xi_theta) at base parameters `u` and angles `theta`."""
    eta = spec.eta(u)
    return t_theta(eta, spec.d, theta), t_phi(eta, spec.d, theta), xi_theta(eta, spec.d, theta)
