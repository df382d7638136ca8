"""Minimal geodesics, midpoint sets and the polar description of cut loci."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Union

import numpy as np

from . import manifold as mf
from .fd import derivative_norms
from .manifold import Circle, FlatTorus, Manifold, ManifoldError, Sphere

TIE_RTOL = 1e-9
NEAR_TIE_RTOL = 1e-6
ZERO_DERIVATIVE = 1e-5
EQUATOR_NODES = 256


class NearTieWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Geodesic:
    """Unit-speed minimal geodesic from `start` with initial direction `direction`."""
    start: np.ndarray
    direction: np.ndarray
    length: float
    end: np.ndarray
    arrival: np.ndarray

    def point(self, M: Manifold, s) -> np.ndarray:
        return mf.exp_map(M, self.start, np.multiply.outer(np.asarray(s, dtype=float), self.direction))

    def tangent(self, M: Manifold, s: float) -> np.ndarray:
        if isinstance(M, Sphere):
            R = M.radius
            return -math.sin(s / R) * self.start / R + math.cos(s / R) * self.direction
        return self.direction.copy()


@dataclass
class Equator:
    """Midpoint set of an antipodal pair on a sphere: the great sphere equidistant from both."""
    x: np.ndarray
    y: np.ndarray
    radius: float
    nodes: np.ndarray
    weights: np.ndarray
    pole: np.ndarray = field(repr=False)

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())


@dataclass
class MidpointRecord:
    z: np.ndarray
    geodesic: Geodesic
    frame: np.ndarray
    hessian_h: np.ndarray
    h0_product: float


@dataclass
class OrderReport:
    order: Optional[int]
    m_max: int
    derivative_norms: np.ndarray

    @property
    def saturated(self) -> bool:
        return self.order is None

    def __str__(self) -> str:
        return f">= {self.m_max}" if self.order is None else str(self.order)


@dataclass
class ThetaClassification:
    theta: np.ndarray
    d_theta: float
    label: str
    associates: List[np.ndarray]
    continuum: bool = False
    conjugacy: Optional[OrderReport] = None

    @property
    def n_associates(self) -> int:
        return -1 if self.continuum else len(self.associates)


# ---------------------------------------------------------------------------
# minimal geodesics

def _sphere_geodesic(M: Sphere, x, theta, d) -> Geodesic:
    R = M.radius
    end = mf.exp_map(M, x, d * theta)
    arrival = -math.sin(d / R) * x / R + math.cos(d / R) * theta
    return Geodesic(x, theta, float(d), end, arrival)


def _flat_geodesic(M: Manifold, x, v) -> Geodesic:
    d = float(np.linalg.norm(v))
    theta = v / d if d > 0 else np.zeros_like(v)
    return Geodesic(x, theta, d, mf.exp_map(M, x, v), theta.copy())


def _lattice_range(M: Manifold) -> list:
    periods = mf._periods(M)
    diam = 0.5 * float(np.linalg.norm(periods))
    return [range(-(math.ceil(diam / L) + 1), math.ceil(diam / L) + 2) for L in periods]


def _lattice_images(M: Manifold, x, y) -> np.ndarray:
    periods = mf._periods(M)
    base = mf._wrap(np.asarray(y, dtype=float) - np.asarray(x, dtype=float), periods)
    ks = np.array(list(product(*_lattice_range(M))), dtype=float)
    return base + ks * periods


def is_antipodal(M: Sphere, x, y, tol: float = TIE_RTOL) -> bool:
    return float(mf.distance(M, x, y)) >= math.pi * M.radius * (1.0 - tol)


def minimal_geodesics(M: Manifold, x, y) -> Union[List[Geodesic], Equator]:
    """All minimal geodesics from x to y, or an Equator descriptor for antipodal sphere pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(M, Sphere):
        R = M.radius
        if is_antipodal(M, x, y):
            if M.dim == 1:
                e = mf.tangent_basis(M, x)[0]
                return [_sphere_geodesic(M, x, s * e, math.pi * R) for s in (1.0, -1.0)]
            return equator(M, x, y)
        v = mf.log_map(M, x, y)
        d = float(np.linalg.norm(v))
        if d == 0:
            raise ManifoldError("x and y coincide; there is no midpoint geodesic to select")
        return [_sphere_geodesic(M, x, v / d, d)]
    images = _lattice_images(M, x, y)
    lengths = np.linalg.norm(images, axis=-1)
    dmin = float(lengths.min())
    if dmin == 0:
        raise ManifoldError("x and y coincide; there is no midpoint geodesic to select")
    tie = lengths <= dmin * (1 + TIE_RTOL)
    near = (lengths <= dmin * (1 + NEAR_TIE_RTOL)) & ~tie
    if np.any(near):
        warnings.warn("near-tie between minimal geodesic candidates", NearTieWarning)
    return [_flat_geodesic(M, x, v) for v in images[tie]]


def equator(M: Sphere, x, y, nodes: int = EQUATOR_NODES) -> Equator:
    """Quadrature description of the equidistant great sphere of an antipodal pair."""
    x = np.asarray(x, dtype=float)
    R = M.radius
    basis = mf.tangent_basis(M, x)
    if M.dim == 2:
        ang = 2 * np.pi * np.arange(nodes) / nodes
        pts = R * (np.cos(ang)[:, None] * basis[0] + np.sin(ang)[:, None] * basis[1])
        w = np.full(nodes, 2 * np.pi * R / nodes)
    elif M.dim == 3:
        m = max(8, nodes // 4)
        c, wc = np.polynomial.legendre.leggauss(m)
        ang = 2 * np.pi * np.arange(nodes // 2) / (nodes // 2)
        C, A = np.meshgrid(c, ang, indexing="ij")
        S = np.sqrt(1 - C**2)
        pts = R * (C[..., None] * basis[2] + S[..., None]
                   * (np.cos(A)[..., None] * basis[0] + np.sin(A)[..., None] * basis[1]))
        pts = pts.reshape(-1, 4)
        w = (wc[:, None] * np.full(ang.size, 2 * np.pi / ang.size)).reshape(-1) * R**2
    else:
        raise ManifoldError(f"equator quadrature is implemented for S^2 and S^3, not S^{M.dim}")
    return Equator(x=x, y=np.asarray(y, dtype=float), radius=0.5 * math.pi * R,
                   nodes=pts, weights=w, pole=x / R)


# ---------------------------------------------------------------------------
# midpoints and the function h

def h_function(M: Manifold, x, y, z) -> np.ndarray:
    """h_{x,y}(z) = E(x, z) + E(y, z)."""
    return mf.energy(M, x, z) + mf.energy(M, y, z)


def hessian_h_eigenvalues(M: Manifold, d: float):
    """(radial, transverse) eigenvalues of Hess h at a midpoint of a pair at distance d."""
    rad, trans = mf.radial_energy_hessian(M, 0.5 * d)
    return 2.0 * float(rad), 2.0 * float(trans)


def midpoint_record(M: Manifold, g: Geodesic) -> MidpointRecord:
    d = g.length
    z = g.point(M, 0.5 * d)
    frame = mf.tangent_basis(M, z, first=g.tangent(M, 0.5 * d))
    rad, trans = hessian_h_eigenvalues(M, d)
    H = np.diag([rad] + [trans] * (M.dim - 1))
    h0p = float(mf.h0(M, g.start, z) * mf.h0(M, g.end, z))
    return MidpointRecord(z=z, geodesic=g, frame=frame, hessian_h=H, h0_product=h0p)


def midpoint_set(M: Manifold, x, y) -> Union[List[MidpointRecord], Equator]:
    geos = minimal_geodesics(M, x, y)
    if isinstance(geos, Equator):
        return geos
    return [midpoint_record(M, g) for g in geos]


# ---------------------------------------------------------------------------
# cut loci in polar coordinates

def cut_distance(M: Manifold, x, theta) -> float:
    """d(theta): length of the geodesic in direction theta before it stops minimising."""
    if isinstance(M, (Circle, Sphere)):
        return math.pi * M.radius
    theta = np.asarray(theta, dtype=float)
    periods = np.asarray(M.periods)
    best = math.inf
    for k in product(*_lattice_range(M)):
        v = np.asarray(k, dtype=float) * periods
        s = float(np.dot(v, theta))
        if s > 0:
            best = min(best, float(np.dot(v, v)) / (2 * s))
    return best


def cut_point(M: Manifold, x, theta) -> np.ndarray:
    return mf.exp_map(M, x, cut_distance(M, x, theta) * np.asarray(theta, dtype=float))


def distance_to_cut(M: Manifold, x, p) -> np.ndarray:
    """Distance from p to Cut(x)."""
    if isinstance(M, (Circle, Sphere)):
        return math.pi * M.radius - mf.distance(M, x, p)
    diff = np.abs(mf._wrap(np.asarray(p, dtype=float) - np.asarray(x, dtype=float), mf._periods(M)))
    return np.min(0.5 * np.asarray(M.periods) - diff, axis=-1)


def conjugacy_order(M: Manifold, g: Geodesic, xi, m_max: int = 4) -> OrderReport:
    """Order to which exp_x(d, .) is constant at theta along xi (0 means not conjugate)."""
    norms = mf.exp_directional_derivatives(M, g.start, g.length, g.direction, xi, m_max)
    scale = M.radius if isinstance(M, Sphere) else 1.0
    nz = np.nonzero(norms > ZERO_DERIVATIVE * scale)[0]
    return OrderReport(order=int(nz[0]) if nz.size else None, m_max=m_max, derivative_norms=norms)


def h_constancy_order(M: Manifold, x, y, z, xi, m_max: int = 4) -> OrderReport:
    """Order to which s -> h_{x,y}(exp_z(s xi)) is constant at s = 0."""
    z = np.asarray(z, dtype=float)
    xi = mf.project_tangent(M, z, xi)
    xi = xi / np.linalg.norm(xi)
    scale = M.radius if isinstance(M, Sphere) else 1.0

    def curve(s):
        return h_function(M, x, y, mf.exp_map(M, z, s * xi))

    norms = derivative_norms(curve, m_max, 1e-2 * scale, 5e-2 * scale)
    nz = np.nonzero(norms > ZERO_DERIVATIVE * max(1.0, scale**2))[0]
    return OrderReport(order=int(nz[0]) if nz.size else None, m_max=m_max, derivative_norms=norms)


def associated_directions(M: Manifold, x, theta):
    """Other initial directions whose geodesic reaches the same cut point at the same distance.

    Returns (directions, continuum); continuum is True when the set is a
    whole sphere of directions (sphere models).
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(M, Sphere) and M.dim > 1:
        return [], True
    if isinstance(M, (Circle, Sphere)):
        return [-theta], False
    d = cut_distance(M, x, theta)
    q = d * theta
    periods = np.asarray(M.periods)
    out = []
    for k in product(*_lattice_range(M)):
        if not any(k):
            continue
        v = q + np.asarray(k, dtype=float) * periods
        if abs(float(np.linalg.norm(v)) - d) <= TIE_RTOL * d:
            out.append(v / d)
    return out, False


def transverse_directions(M: Manifold, x, theta) -> np.ndarray:
    return mf.tangent_basis(M, x, first=theta)[1:]


def classify_theta(M: Manifold, x, theta, m_max: int = 4) -> ThetaClassification:
    """Label a direction C (conjugate), P (one non-conjugate associate) or R."""
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    d = cut_distance(M, x, theta)
    worst = None
    if M.dim > 1:
        g = _sphere_geodesic(M, x, theta, d) if isinstance(M, Sphere) else _flat_geodesic(M, x, d * theta)
        for xi in transverse_directions(M, x, theta):
            rep = conjugacy_order(M, g, xi, m_max)
            if worst is None or rep.order is None or (worst.order is not None and rep.order > worst.order):
                worst = rep
    conj = worst is not None and (worst.order is None or worst.order >= 1)
    assoc, continuum = associated_directions(M, x, theta)
    if conj:
        label = "C"
    elif len(assoc) == 1:
        label = "P"
    else:
        label = "R"
    return ThetaClassification(theta=theta, d_theta=d, label=label, associates=assoc,
                               continuum=continuum, conjugacy=worst)
