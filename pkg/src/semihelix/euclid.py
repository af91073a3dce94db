"""
Small dense linear algebra over R^n.

Everything here works on plain float64 numpy arrays. The handful of value
types (`AngleWindow`, `Hyperplane`) are frozen dataclasses that validate on
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from semihelix.errors import DegenerateBasis, ValidationError

UNIT_TOL = 1e-12
GRAM_COND_MAX = 1e12
ORTHONORMAL_TOL = 1e-10


def as_vec(x: ArrayLike) -> NDArray[np.float64]:
    """Coerce to a 1-d float vector of dimension >= 1 with finite entries."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


def normalize(v: ArrayLike, tol: float = 1e-15) -> NDArray[np.float64]:
    """Unit vector along `v`; batched over leading axes."""
    a = np.asarray(v, dtype=np.float64)
    nrm = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(nrm <= tol):
        raise ValueError("cannot normalize a zero-length vector")
    return a / nrm


def direction(v: ArrayLike, *, strict: bool = False) -> NDArray[np.float64]:
    """
    Return `v` as a unit direction.

    With ``strict=True`` the input must already be unit within 1e-12 and is
    returned unchanged; otherwise it is normalized.
    """
    a = as_vec(v)
    if strict:
        if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
            raise ValidationError(f"direction is not unit: |d| = {np.linalg.norm(a)!r}")
        return a
    return normalize(a)


def axis(n: int, i: int = -1) -> NDArray[np.float64]:
    e = np.zeros(n)
    e[i] = 1.0
    return e


@dataclass(frozen=True)
class AngleWindow:
    """The open interval (theta0 - epsilon, theta0 + epsilon) of admissible angles.

    ``epsilon == 0`` is the helix case; membership then means equality with
    ``theta0`` up to ``helix_tol``.
    """

    theta0: float = 0.0
    epsilon: float = 0.0
    helix_tol: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.theta0) and math.isfinite(self.epsilon)):
            raise ValidationError("window bounds must be finite")
        if not 0.0 <= self.epsilon < math.pi / 2:
            raise ValidationError(
                f"epsilon={self.epsilon!r} violates 0 <= epsilon < pi/2"
            )
        if self.theta0 - self.epsilon <= -math.pi / 2 or self.theta0 + self.epsilon >= math.pi / 2:
            raise ValidationError(
                f"window ({self.lower!r}, {self.upper!r}) is not inside (-pi/2, pi/2)"
            )

    @property
    def lower(self) -> float:
        return self.theta0 - self.epsilon

    @property
    def upper(self) -> float:
        return self.theta0 + self.epsilon

    def margin(self, theta: ArrayLike) -> NDArray[np.float64]:
        """Signed distance to the window boundary; positive means inside."""
        return self.epsilon - np.abs(np.asarray(theta, dtype=np.float64) - self.theta0)

    def contains(self, theta: ArrayLike) -> NDArray[np.bool_]:
        m = self.margin(theta)
        if self.epsilon == 0.0:
            return m >= -self.helix_tol
        return m > 0.0


@dataclass(frozen=True)
class Hyperplane:
    point: NDArray[np.float64]
    normal: NDArray[np.float64]

    def __post_init__(self):
        p = as_vec(self.point)
        nrm = direction(self.normal)
        if p.shape != nrm.shape:
            raise ValueError("point and normal dimensions differ")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "normal", nrm)

    def offset(self, y: ArrayLike) -> NDArray[np.float64]:
        """Signed offset <y - point, normal>, batched over leading axes of y."""
        return (np.asarray(y, dtype=np.float64) - self.point) @ self.normal


def project_onto_subspace(v: ArrayLike, basis) -> NDArray[np.float64]:
    """
    Orthogonal projection of `v` onto span(basis) via the Gram system.

    Raises:
        DegenerateBasis: if the Gram matrix has condition number above 1e12.
    """
    v = as_vec(v)
    if len(basis) == 0:
        return np.zeros_like(v)
    B = np.asarray(basis, dtype=np.float64).reshape(len(basis), -1)
    if B.shape[1] != v.shape[0]:
        raise ValueError("basis vectors and v have different dimensions")
    G = B @ B.T
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > GRAM_COND_MAX:
        raise DegenerateBasis(f"Gram matrix condition number {cond:.3g} exceeds 1e12")
    coeff = np.linalg.solve(G, B @ v)
    return B.T @ coeff


def signed_angle(d: ArrayLike, xi: ArrayLike) -> NDArray[np.float64] | float:
    """Angle between `d` and the hyperplane with unit normal `xi`: arcsin<d, xi>.

    Batched over leading axes of `xi`. Clamps the inner product so roundoff
    near +-1 never produces NaN.
    """
    s = np.asarray(xi, dtype=np.float64) @ np.asarray(d, dtype=np.float64)
    out = np.arcsin(np.clip(s, -1.0, 1.0))
    return float(out) if np.ndim(out) == 0 else out


def extend_orthonormal_basis(partial, n: int) -> NDArray[np.float64]:
    """
    Complete an orthonormal set to a basis of R^n.

    Returns an (n, n) array whose rows are the basis vectors; the first rows
    are the input vectors unchanged. Candidates are the coordinate axes in
    index order, each orthogonalised twice against the current set and
    skipped when nearly dependent.
    """
    P = np.asarray(partial, dtype=np.float64).reshape(len(partial), n) if len(partial) else np.zeros((0, n))
    if P.shape[0] > n:
        raise DegenerateBasis("more vectors than the dimension")
    if P.shape[0] and np.max(np.abs(P @ P.T - np.eye(P.shape[0]))) > ORTHONORMAL_TOL:
        raise DegenerateBasis("partial set is not orthonormal")
    rows = list(P)
    for j in range(n):
        if len(rows) == n:
            break
        w = np.zeros(n)
        w[j] = 1.0
        for _ in range(2):
            for b in rows:
                w = w - (w @ b) * b
        nw = np.linalg.norm(w)
        if nw < 1e-6:
            continue
        rows.append(w / nw)
    if len(rows) != n:
        raise DegenerateBasis("could not complete the basis")
    return np.array(rows)


def hyperplane_slice_test(q: Hyperplane, y: ArrayLike, tol: float) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return bool(abs(q.offset(as_vec(y))) <= tol)


def gram_schmidt(vectors) -> NDArray[np.float64]:
    """Classical Gram-Schmidt with re-orthogonalisation; rows in, rows out."""
    out = []
    for v in np.asarray(vectors, dtype=np.float64):
        w = v.copy()
        for _ in range(2):
            for b in out:
                w = w - (w @ b) * b
        nw = np.linalg.norm(w)
        if nw < 1e-12:
            raise DegenerateBasis("vectors are linearly dependent")
        out.append(w / nw)
    return np.array(out)
