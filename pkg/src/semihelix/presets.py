"""
Named surface catalog: plane, circle, sphere, cylinder, torus, graph.

Each preset carries an analytic Jacobian and an analytic unit normal (and
the normal's Jacobian), so constructed surfaces built on top of them have
fully analytic derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import replace

import numpy as np

from semihelix.errors import ValidationError
from semihelix.surface import ParamImmersion

TWO_PI = 2.0 * math.pi
SPHERE_LAT = 1.2


def plane(m: int = 3, half_width: float = 1.0) -> ParamImmersion:
    """The coordinate hyperplane x_m = 0 of R^m."""
    k = m - 1

    def ev(u):
        return np.concatenate([u, np.zeros(u.shape[:-1] + (1,))], axis=-1)

    def jac(u):
        J = np.zeros(u.shape[:-1] + (m, k))
        J[..., np.arange(k), np.arange(k)] = 1.0
        return J

    def nrm(u):
        n = np.zeros(u.shape[:-1] + (m,))
        n[..., -1] = 1.0
        return n

    def njac(u):
        return np.zeros(u.shape[:-1] + (m, k))

    return ParamImmersion(ev, -half_width * np.ones(k), half_width * np.ones(k), m,
                          jacobian_fn=jac, normal=nrm, normal_jacobian=njac,
                          name="plane", params={"m": m})


def circle(rho: float = 1.0) -> ParamImmersion:
    def ev(u):
        t = u[..., 0]
        return rho * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def jac(u):
        t = u[..., 0]
        return rho * np.stack([-np.sin(t), np.cos(t)], axis=-1)[..., None]

    def nrm(u):
        t = u[..., 0]
        return np.stack([np.cos(t), np.sin(t)], axis=-1)

    def njac(u):
        t = u[..., 0]
        return np.stack([-np.sin(t), np.cos(t)], axis=-1)[..., None]

    return ParamImmersion(ev, [0.0], [TWO_PI], 2, jacobian_fn=jac, normal=nrm,
                          normal_jacobian=njac, name="circle", params={"rho": rho})


def sphere(rho: float = 1.0, m: int = 3) -> ParamImmersion:
    """Longitude/latitude sphere; latitude kept within +-1.2 to avoid the poles."""
    if m == 2:
        return circle(rho)
    if m != 3:
        raise ValidationError("sphere preset supports ambient dimension 2 or 3")

    def unit(u):
        a, b = u[..., 0], u[..., 1]
        return np.stack([np.cos(a) * np.cos(b), np.sin(a) * np.cos(b), np.sin(b)], axis=-1)

    def unit_jac(u):
        a, b = u[..., 0], u[..., 1]
        da = np.stack([-np.sin(a) * np.cos(b), np.cos(a) * np.cos(b), np.zeros_like(a)], axis=-1)
        db = np.stack([-np.cos(a) * np.sin(b), -np.sin(a) * np.sin(b), np.cos(b)], axis=-1)
        return np.stack([da, db], axis=-1)

    return ParamImmersion(lambda u: rho * unit(u), [0.0, -SPHERE_LAT], [TWO_PI, SPHERE_LAT], 3,
                          jacobian_fn=lambda u: rho * unit_jac(u), normal=unit,
                          normal_jacobian=unit_jac, name="sphere", params={"rho": rho})


def cylinder(rho: float = 1.0, height: float = 1.0) -> ParamImmersion:
    def ev(u):
        a, v = u[..., 0], u[..., 1]
        return np.stack([rho * np.cos(a), rho * np.sin(a), v], axis=-1)

    def jac(u):
        a = u[..., 0]
        z = np.zeros_like(a)
        da = np.stack([-rho * np.sin(a), rho * np.cos(a), z], axis=-1)
        dv = np.stack([z, z, np.ones_like(a)], axis=-1)
        return np.stack([da, dv], axis=-1)

    def nrm(u):
        a = u[..., 0]
        return np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)

    def njac(u):
        a = u[..., 0]
        z = np.zeros_like(a)
        da = np.stack([-np.sin(a), np.cos(a), z], axis=-1)
        return np.stack([da, np.zeros_like(da)], axis=-1)

    return ParamImmersion(ev, [0.0, -height], [TWO_PI, height], 3, jacobian_fn=jac,
                          normal=nrm, normal_jacobian=njac, name="cylinder",
                          params={"rho": rho})


def torus(R: float = 2.0, rho: float = 0.5) -> ParamImmersion:
    if not R > rho > 0:
        raise ValidationError("torus needs R > rho > 0")

    def nrm(u):
        a, b = u[..., 0], u[..., 1]
        return np.stack([np.cos(a) * np.cos(b), np.sin(a) * np.cos(b), np.sin(b)], axis=-1)

    def njac(u):
        a, b = u[..., 0], u[..., 1]
        da = np.stack([-np.sin(a) * np.cos(b), np.cos(a) * np.cos(b), np.zeros_like(a)], axis=-1)
        db = np.stack([-np.cos(a) * np.sin(b), -np.sin(a) * np.sin(b), np.cos(b)], axis=-1)
        return np.stack([da, db], axis=-1)

    def ev(u):
        a = u[..., 0]
        ring = np.stack([np.cos(a), np.sin(a), np.zeros_like(a)], axis=-1)
        return R * ring + rho * nrm(u)

    def jac(u):
        a = u[..., 0]
        z = np.zeros_like(a)
        dring = np.stack([-np.sin(a), np.cos(a), z], axis=-1)
        J = rho * njac(u)
        J[..., :, 0] += R * dring
        return J

    return ParamImmersion(ev, [0.0, 0.0], [TWO_PI, TWO_PI], 3, jacobian_fn=jac, normal=nrm,
                          normal_jacobian=njac, name="torus", params={"R": R, "rho": rho})


def graph(A: float = 0.3, m: int = 3) -> ParamImmersion:
    """Graph of A*sin(x) (m = 2) or A*sin(x)*sin(y) (m = 3) over [-pi, pi]^(m-1)."""
    if m == 2:
        def ev(u):
            x = u[..., 0]
            return np.stack([x, A * np.sin(x)], axis=-1)

        def jac(u):
            x = u[..., 0]
            return np.stack([np.ones_like(x), A * np.cos(x)], axis=-1)[..., None]

        def nrm(u):
            g1 = A * np.cos(u[..., 0])
            return np.stack([-g1, np.ones_like(g1)], axis=-1) / np.sqrt(1 + g1**2)[..., None]

        def njac(u):
            x = u[..., 0]
            g1, g2 = A * np.cos(x), -A * np.sin(x)
            s = np.sqrt(1 + g1**2)
            n = np.stack([-g1, np.ones_like(g1)], axis=-1) / s[..., None]
            dn = np.stack([-g2, np.zeros_like(g2)], axis=-1) / s[..., None] - n * (g1 * g2 / s**2)[..., None]
            return dn[..., None]

        return ParamImmersion(ev, [-math.pi], [math.pi], 2, jacobian_fn=jac, normal=nrm,
                              normal_jacobian=njac, name="graph", params={"A": A})
    if m != 3:
        raise ValidationError("graph preset supports ambient dimension 2 or 3")

    def derivs(u):
        x, y = u[..., 0], u[..., 1]
        sx, cx, sy, cy = np.sin(x), np.cos(x), np.sin(y), np.cos(y)
        return (A * sx * sy, A * cx * sy, A * sx * cy, -A * sx * sy, A * cx * cy, -A * sx * sy)

    def ev(u):
        f = derivs(u)[0]
        return np.stack([u[..., 0], u[..., 1], f], axis=-1)

    def jac(u):
        _, fx, fy, *_ = derivs(u)
        o, z = np.ones_like(fx), np.zeros_like(fx)
        return np.stack([np.stack([o, z, fx], axis=-1), np.stack([z, o, fy], axis=-1)], axis=-1)

    def nrm(u):
        _, fx, fy, *_ = derivs(u)
        n = np.stack([-fx, -fy, np.ones_like(fx)], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def njac(u):
        _, fx, fy, fxx, fxy, fyy = derivs(u)
        s = np.sqrt(1 + fx**2 + fy**2)
        n = np.stack([-fx, -fy, np.ones_like(fx)], axis=-1) / s[..., None]
        z = np.zeros_like(fx)
        dx = np.stack([-fxx, -fxy, z], axis=-1) / s[..., None] - n * ((fx * fxx + fy * fxy) / s**2)[..., None]
        dy = np.stack([-fxy, -fyy, z], axis=-1) / s[..., None] - n * ((fx * fxy + fy * fyy) / s**2)[..., None]
        return np.stack([dx, dy], axis=-1)

    return ParamImmersion(ev, [-math.pi, -math.pi], [math.pi, math.pi], 3, jacobian_fn=jac,
                          normal=nrm, normal_jacobian=njac, name="graph", params={"A": A})


def flipped(s: ParamImmersion) -> ParamImmersion:
    """Same surface with the analytic normal reversed."""
    if s.normal is None:
        raise ValueError("surface has no analytic normal to flip")
    nj = s.normal_jacobian
    return replace(
        s,
        normal=lambda u: -s.normal(u),
        normal_jacobian=None if nj is None else (lambda u: -nj(u)),
    )


_CATALOG = {
    # name: (factory, accepted ambient dims, number of numeric params)
    "plane": (lambda m: plane(m), None, 0),
    "circle": (lambda m, rho=1.0: circle(rho), (2,), 1),
    "sphere": (lambda m, rho=1.0: sphere(rho, m), (2, 3), 1),
    "cylinder": (lambda m, rho=1.0: cylinder(rho), (3,), 1),
    "torus": (lambda m, R=2.0, rho=0.5: torus(R, rho), (3,), 2),
    "graph": (lambda m, A=0.3: graph(A, m), (2, 3), 1),
}

_PRESET_RE = re.compile(r"^\s*([a-z]+)\s*(?:\(\s*([^()]*)\s*\))?\s*$")


def parse_preset(text: str):
    """Split ``"torus(2, 0.5)"`` into ``("torus", (2.0, 0.5))``."""
    match = _PRESET_RE.match(text)
    if not match or match.group(1) not in _CATALOG:
        raise ValidationError(f"unknown surface preset {text!r}; known: {', '.join(_CATALOG)}")
    name, arg_text = match.group(1), match.group(2)
    args = ()
    if arg_text:
        try:
            args = tuple(float(a) for a in arg_text.split(","))
        except ValueError as exc:
            raise ValidationError(f"bad preset arguments in {text!r}") from exc
    if len(args) > _CATALOG[name][2]:
        raise ValidationError(f"preset {name!r} takes at most {_CATALOG[name][2]} arguments")
    return name, args


def preset(text: str, m: int) -> ParamImmersion:
    """Instantiate a catalog surface in R^m from a preset string."""
    name, args = parse_preset(text)
    factory, dims, _ = _CATALOG[name]
    if dims is not None and m not in dims:
        raise ValidationError(f"preset {name!r} lives in R^{dims}, not R^{m}")
    if m < 2:
        raise ValidationError("ambient dimension must be at least 2")
    if any(a <= 0 for a in args) and name != "graph":
        raise ValidationError(f"preset {name!r} needs positive parameters")
    return factory(m, *args)


PRESET_NAMES = tuple(_CATALOG)
