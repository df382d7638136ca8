"""Model manifolds and their closed-form geometry.

Three models are supported: a circle of radius R, a round sphere S^n of
radius R embedded in R^(n+1), and a flat rectangular torus R^n / prod L_i Z.
Points are numpy arrays: arclength coordinate for the circle (shape (1,)),
ambient vectors of norm R for the sphere, coordinates in [0, L_i) for the
torus. Tangent vectors use the same ambient coordinates.

All point-wise operations broadcast over leading axes of their array
arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .fd import derivative_norms


class ManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class Circle:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ManifoldError(f"circle radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return 1

    @property
    def ambient_dim(self) -> int:
        return 1

    @property
    def length(self) -> float:
        return 2.0 * np.pi * self.radius


@dataclass(frozen=True)
class Sphere:
    dim: int = 2
    radius: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ManifoldError(f"sphere dimension must be a positive integer, got {self.dim}")
        if not self.radius > 0:
            raise ManifoldError(f"sphere radius must be positive, got {self.radius}")

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1


@dataclass(frozen=True)
class FlatTorus:
    periods: tuple

    def __post_init__(self):
        periods = tuple(float(p) for p in np.atleast_1d(self.periods))
        if len(periods) == 0 or any(not p > 0 for p in periods):
            raise ManifoldError(f"torus periods must be positive, got {self.periods}")
        object.__setattr__(self, "periods", periods)

    @property
    def dim(self) -> int:
        return len(self.periods)

    @property
    def ambient_dim(self) -> int:
        return len(self.periods)

    @property
    def diameter(self) -> float:
        return 0.5 * float(np.linalg.norm(self.periods))


Manifold = Union[Circle, Sphere, FlatTorus]


def model_from_dict(data: dict) -> Manifold:
    """Build a model from its JSON form, e.g. {"model": "sphere", "dim": 2, "radius": 1.0}."""
    kind = str(data.get("model", "")).lower()
    if kind == "circle":
        return Circle(float(data.get("radius", 1.0)))
    if kind == "sphere":
        return Sphere(int(data.get("dim", 2)), float(data.get("radius", 1.0)))
    if kind in ("torus", "flat_torus", "flattorus"):
        return FlatTorus(tuple(float(p) for p in data["periods"]))
    raise ManifoldError(f"unknown model {data.get('model')!r}")


def model_to_dict(M: Manifold) -> dict:
    if isinstance(M, Circle):
        return {"model": "circle", "radius": M.radius}
    if isinstance(M, Sphere):
        return {"model": "sphere", "dim": M.dim, "radius": M.radius}
    return {"model": "torus", "periods": list(M.periods)}


def _wrap(u, period):
    """Representative of u modulo period in [-period/2, period/2)."""
    return u - period * np.floor(u / period + 0.5)


def _periods(M) -> np.ndarray:
    if isinstance(M, Circle):
        return np.array([M.length])
    return np.asarray(M.periods)


def validate_point(M: Manifold, x, tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (M.ambient_dim,):
        raise ManifoldError(f"point has shape {x.shape}, expected trailing axis {M.ambient_dim}")
    if isinstance(M, Sphere):
        r = np.linalg.norm(x, axis=-1)
        if np.any(np.abs(r / M.radius - 1.0) > tol):
            raise ManifoldError("sphere point does not have norm equal to the radius")
        return x
    return np.mod(x, _periods(M))


def project_tangent(M: Manifold, x, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if isinstance(M, Sphere):
        x = np.asarray(x, dtype=float)
        u = x / M.radius
        return v - np.sum(v * u, axis=-1, keepdims=True) * u
    return v


def tangent_basis(M: Manifold, x, first=None) -> np.ndarray:
    """Orthonormal basis of T_xM as rows, optionally starting with `first`."""
    x = np.asarray(x, dtype=float)
    seed = []
    if isinstance(M, Sphere):
        seed.append(x / M.radius)
    if first is not None:
        f = project_tangent(M, x, first)
        if np.linalg.norm(f) == 0:
            raise ManifoldError("first basis vector is zero")
        seed.append(f)
    cols: list = []
    for w in list(seed) + list(np.eye(M.ambient_dim)):
        w = np.array(w, dtype=float)
        for _ in range(2):  # re-orthogonalise once
            for c in cols:
                w = w - np.dot(w, c) * c
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            cols.append(w / nw)
    if isinstance(M, Sphere):
        cols = cols[1:]
    return np.array(cols[: M.dim])


def exp_map(M: Manifold, x, v) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(M, Sphere):
        R = M.radius
        r = np.linalg.norm(v, axis=-1, keepdims=True)
        safe = np.where(r > 0, r, 1.0)
        return np.cos(r / R) * x + R * np.sin(r / R) * v / safe
    return np.mod(x + v, _periods(M))


def exp_lift(M: Manifold, x, v) -> np.ndarray:
    """exp_x(v) in a smooth ambient lift: no reduction modulo the lattice."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(M, Sphere):
        return exp_map(M, x, v)
    return x + v


def log_map(M: Manifold, x, y) -> np.ndarray:
    """Initial velocity of a minimal geodesic from x to y (one choice at cut points)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(M, Sphere):
        R = M.radius
        c = np.clip(np.sum(x * y, axis=-1, keepdims=True) / R**2, -1.0, 1.0)
        w = y - c * x
        nw = np.linalg.norm(w, axis=-1, keepdims=True)
        ang = np.arctan2(nw / R, c)
        safe = np.where(nw > 0, nw, 1.0)
        return np.where(nw > 0, R * ang * w / safe, 0.0)
    return _wrap(y - x, _periods(M))


def distance(M: Manifold, x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(M, Sphere):
        R = M.radius
        # atan2 form is accurate at both small and near-antipodal separations
        cross = np.linalg.norm(y - np.sum(x * y, axis=-1, keepdims=True) / R**2 * x, axis=-1)
        dot = np.sum(x * y, axis=-1) / R
        return R * np.arctan2(cross, dot)
    return np.linalg.norm(_wrap(y - x, _periods(M)), axis=-1)


def energy(M: Manifold, x, y) -> np.ndarray:
    return 0.5 * distance(M, x, y) ** 2


def injectivity_radius(M: Manifold) -> float:
    if isinstance(M, Circle):
        return np.pi * M.radius
    if isinstance(M, Sphere):
        return np.pi * M.radius
    return 0.5 * min(M.periods)


def exp_jacobian(M: Manifold, x, v) -> np.ndarray:
    """Density of exp_x pulled back to T_xM at v (1 for flat models)."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    if isinstance(M, Sphere) and M.dim > 1:
        s = r / M.radius
        ratio = np.where(s > 1e-8, np.sin(s) / np.where(s > 0, s, 1.0), 1.0 - s**2 / 6)
        return ratio ** (M.dim - 1)
    return np.ones_like(r)


def polar_volume_density(M: Manifold, x, r, theta=None) -> np.ndarray:
    """Riemannian volume in polar coordinates at x, per unit r and unit direction measure."""
    r = np.asarray(r, dtype=float)
    n = M.dim
    if isinstance(M, Sphere):
        return (M.radius * np.sin(r / M.radius)) ** (n - 1)
    return r ** (n - 1)


def h0(M: Manifold, x, y) -> np.ndarray:
    """Leading Pleijel coefficient (Jacobian of exp)^(-1/2); y must avoid Cut(x)."""
    d = distance(M, x, y)
    if isinstance(M, Sphere) and M.dim > 1:
        if np.any(d >= np.pi * M.radius * (1 - 1e-12)):
            raise ManifoldError("H0 is undefined: y lies in the cut locus of x")
        v = log_map(M, x, y)
        return exp_jacobian(M, x, v) ** -0.5
    return np.ones_like(d)


def radial_energy_hessian(M: Manifold, r):
    """Eigenvalues (radial, transverse) of the Hessian of E(p, .) at distance r from p."""
    r = np.asarray(r, dtype=float)
    if isinstance(M, Sphere):
        s = r / M.radius
        trans = np.where(s > 1e-8, s * np.cos(s) / np.where(s > 0, np.sin(s), 1.0), 1.0 - s**2 / 3)
        return np.ones_like(r), trans
    return np.ones_like(r), np.ones_like(r)


def rotate_direction(theta, xi, angle):
    """Great-circle rotation of unit direction theta toward unit xi (xi orthogonal to theta)."""
    angle = np.asarray(angle, dtype=float)[..., None]
    return np.cos(angle) * theta + np.sin(angle) * xi


def exp_directional_derivatives(M: Manifold, x, d: float, theta, xi, m_max: int = 4) -> np.ndarray:
    """Norms of the first m_max derivatives of s -> exp_x(d, theta(s)) at s = 0.

    theta(s) rotates the unit direction theta toward the orthogonal unit
    direction xi along the great circle of the direction sphere. Central
    differences on the ambient lift in the rotation angle: step 1e-2 for
    orders up to 4, wider stencils with step 5e-2 above.
    """
    if M.dim < 2:
        raise ManifoldError("a one-dimensional model has no transverse directions")
    theta = np.asarray(theta, dtype=float)
    xi = project_tangent(M, x, xi)
    xi = xi - np.dot(xi, theta) * theta
    if np.linalg.norm(xi) < 1e-12:
        raise ManifoldError("xi must be transverse to theta")
    xi = xi / np.linalg.norm(xi)

    def curve(s):
        return exp_lift(M, x, d * rotate_direction(theta, xi, s))

    return derivative_norms(curve, m_max, 1e-2, 5e-2)
