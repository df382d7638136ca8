"""The midpoint measure mu_t on a neighbourhood of the midpoint set, and what it computes.

mu_t has density proportional to H0(x, z) H0(y, z) exp(-2 h_{x,y}(z) / t)
on Gamma_eps. Gamma_eps is discretised in normal coordinates around each
midpoint (a cube of half-width min(eps, 8 sqrt t)) or, for an antipodal
sphere pair, as equator nodes times a latitude band. Trapezoid weights
times the exp Jacobian give Riemannian volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import heatkernel as hk
from .. import manifold as mf
from ..geodesy import Equator, MidpointRecord, distance_to_cut, h_function, midpoint_set
from ..manifold import Manifold, ManifoldError, Sphere

GRID_NODES = 21
SPAN_SQRT_T = 8.0


class EpsilonTooLargeError(ValueError):
    pass


class QuadratureResolutionError(RuntimeError):
    pass


@dataclass
class MuMeasure:
    nodes: np.ndarray
    weights: np.ndarray
    t: float
    epsilon: float
    owner: np.ndarray
    volume: np.ndarray
    density: np.ndarray = field(repr=False)
    log_norm: float = 0.0

    def expectation(self, values) -> np.ndarray:
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))

    def variance(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        m = self.expectation(v)
        return self.expectation((v - m) ** 2)

    def normalized_density(self) -> np.ndarray:
        """Continuous density of mu_t with respect to Riemannian volume at the nodes."""
        return self.density / math.exp(self.log_norm)


@dataclass
class RepresentationReport:
    lhs: float
    rhs: float
    residual: float
    refinement_delta: float
    t: float
    epsilon: float
    nodes: int

    @property
    def resolved(self) -> bool:
        return self.refinement_delta <= max(1e-4, 0.1 * self.residual) * max(abs(self.lhs), 1.0)


@dataclass
class LimitMeasure:
    points: np.ndarray
    weights: np.ndarray


# ---------------------------------------------------------------------------
# Gamma_eps

def _gamma(M, x, y):
    gam = midpoint_set(M, x, y)
    if isinstance(gam, list) and len(gam) == 0:
        raise ManifoldError("empty midpoint set")
    return gam


def _min_distance_to_cut(M: Manifold, x, y, pts) -> float:
    return float(min(np.min(distance_to_cut(M, x, pts)), np.min(distance_to_cut(M, y, pts))))


def _overlap_margin(M: Manifold, gam) -> float:
    if isinstance(gam, Equator) or len(gam) < 2:
        return math.inf
    zs = np.array([r.z for r in gam])
    d = min(float(mf.distance(M, zs[i], zs[j])) for i in range(len(zs)) for j in range(i + 1, len(zs)))
    # cubes of half-width eps must not overlap: eps * sqrt(n) < d / 2
    return d / math.sqrt(M.dim)


def default_epsilon(M: Manifold, x, y, include_endpoints: bool = True) -> float:
    """Half the distance from Gamma to Cut(x), Cut(y) and (optionally) {x, y}."""
    gam = _gamma(M, x, y)
    if isinstance(gam, Equator):
        pts = gam.nodes
    else:
        pts = np.array([r.z for r in gam])
    margin = _min_distance_to_cut(M, x, y, pts)
    if include_endpoints:
        margin = min(margin, float(np.min(mf.distance(M, x, pts))), float(np.min(mf.distance(M, y, pts))))
    return 0.5 * min(margin, _overlap_margin(M, gam))


def _trapezoid(nodes: int, span: float):
    u = np.linspace(-span, span, nodes)
    w = np.full(nodes, 2 * span / (nodes - 1))
    w[[0, -1]] *= 0.5
    return u, w


def gamma_grid(M: Manifold, x, y, epsilon: float, span: float, nodes: int = GRID_NODES):
    """Quadrature nodes on Gamma_eps: (points, volume weights, owner index, normal coordinates)."""
    gam = _gamma(M, x, y)
    u, w = _trapezoid(nodes, span)
    if isinstance(gam, Equator):
        R = M.radius
        s = u
        e = gam.nodes
        pts = (np.cos(s / R)[None, :, None] * e[:, None, :]
               + R * np.sin(s / R)[None, :, None] * gam.pole[None, None, :])
        vol = gam.weights[:, None] * (np.cos(s / R) ** (M.dim - 1) * w)[None, :]
        owner = np.repeat(np.arange(e.shape[0]), s.size)
        coords = np.tile(s, e.shape[0])[:, None]
        return pts.reshape(-1, M.ambient_dim), vol.reshape(-1), owner, coords
    n = M.dim
    grids = np.meshgrid(*([u] * n), indexing="ij")
    U = np.stack([g.reshape(-1) for g in grids], axis=-1)
    W = np.ones(U.shape[0])
    for g in np.meshgrid(*([w] * n), indexing="ij"):
        W = W * g.reshape(-1)
    P, V, O, C = [], [], [], []
    for i, rec in enumerate(gam):
        v = U @ rec.frame
        P.append(mf.exp_map(M, rec.z, v))
        V.append(W * mf.exp_jacobian(M, rec.z, v))
        O.append(np.full(U.shape[0], i))
        C.append(U)
    return np.concatenate(P), np.concatenate(V), np.concatenate(O), np.concatenate(C)


def _check_epsilon(M, x, y, epsilon, include_endpoints=True) -> float:
    limit = default_epsilon(M, x, y, include_endpoints)
    if epsilon is None:
        return limit
    if epsilon > limit * (1 + 1e-12):
        raise EpsilonTooLargeError(
            f"epsilon = {epsilon:.6g} exceeds the admissible {limit:.6g} by {epsilon - limit:.3g}; "
            "Gamma_eps would reach within eps of a cut locus or an endpoint")
    if epsilon <= 0:
        raise EpsilonTooLargeError("epsilon must be positive")
    return float(epsilon)


def mu_t(M: Manifold, x, y, t: float, epsilon: Optional[float] = None, nodes: int = GRID_NODES) -> MuMeasure:
    hk._check_t(t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eps = _check_epsilon(M, x, y, epsilon)
    span = min(eps, SPAN_SQRT_T * math.sqrt(t))
    pts, vol, owner, _ = gamma_grid(M, x, y, eps, span, nodes)
    hmin = 0.5 * float(mf.energy(M, x, y))
    expo = -2.0 * (h_function(M, x, y, pts) - hmin) / t
    amp = mf.h0(M, x, pts) * mf.h0(M, y, pts)
    dens = amp * np.exp(expo)
    mass = dens * vol
    Z = mass.sum()
    return MuMeasure(nodes=pts, weights=mass / Z, t=float(t), epsilon=eps, owner=owner,
                     volume=vol, density=dens, log_norm=math.log(Z))


def mu_expectation(mu: MuMeasure, f: Callable) -> np.ndarray:
    return mu.expectation(f(mu.nodes))


# ---------------------------------------------------------------------------
# leading terms

def grad_energy_second_slot(M: Manifold, z, y, A) -> np.ndarray:
    """grad_A E(z, y) in y: -<A, log_y z>."""
    A = mf.project_tangent(M, y, A)
    return -np.sum(mf.log_map(M, np.asarray(y, dtype=float), z) * A, axis=-1)


def cos_angle(M: Manifold, z, y, A) -> np.ndarray:
    """cos of the angle at y between A and the direction Y(z) of the geodesic arriving from z."""
    A = mf.project_tangent(M, y, A)
    Y = -mf.log_map(M, np.asarray(y, dtype=float), z)
    return np.sum(Y * A, axis=-1) / (np.linalg.norm(Y, axis=-1) * np.linalg.norm(A))


def leading_gradient(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None) -> float:
    """2 E^mu[grad_A E(z, y)]."""
    mu = mu_t(M, x, y, t, epsilon)
    return float(2.0 * mu.expectation(grad_energy_second_slot(M, mu.nodes, y, A)))


def leading_hessian(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None) -> float:
    """-(4/t) Var^mu[grad_A E(z, y)]."""
    mu = mu_t(M, x, y, t, epsilon)
    return float(-4.0 / t * mu.variance(grad_energy_second_slot(M, mu.nodes, y, A)))


def leading_hessian_angle(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None,
                          exact_distance: bool = True) -> float:
    """Hessian leading term through cos theta_A.

    With exact_distance the per-node factor dist(z, y)|A| cos theta_A(z) is
    used, which equals grad_A E(z, y) identically; otherwise the constant
    dist(x, y)/2 of the midpoint set, giving -(|A|^2 dist^2 / t) Var[cos theta_A].
    """
    mu = mu_t(M, x, y, t, epsilon)
    c = cos_angle(M, mu.nodes, y, A)
    nA = float(np.linalg.norm(mf.project_tangent(M, y, A)))
    if exact_distance:
        r = mf.distance(M, mu.nodes, y)
        return float(-4.0 / t * mu.variance(r * nA * c))
    d = float(mf.distance(M, x, y))
    return float(-(nA**2) * d**2 / t * mu.variance(c))


def leading_gradient_angle(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None) -> float:
    """|A| dist(x, y) E^mu[cos theta_A]."""
    mu = mu_t(M, x, y, t, epsilon)
    nA = float(np.linalg.norm(mf.project_tangent(M, y, A)))
    d = float(mf.distance(M, x, y))
    return float(nA * d * mu.expectation(cos_angle(M, mu.nodes, y, A)))


@dataclass
class BoundsReport:
    t: float
    gradient: float
    scaled_hessian: float
    grad_limit: float
    hess_limit: float

    @property
    def satisfied(self) -> bool:
        tol = 1e-12 * max(1.0, self.hess_limit)
        return (abs(self.gradient) <= self.grad_limit * (1 + 1e-12)
                and -self.hess_limit - tol <= self.scaled_hessian <= tol)


def leading_bounds(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None) -> BoundsReport:
    """Bounds |grad| <= |A| dist and -|A|^2 dist^2 <= t hess <= 0 for the cos theta_A forms."""
    nA = float(np.linalg.norm(mf.project_tangent(M, y, A)))
    d = float(mf.distance(M, x, y))
    g = leading_gradient_angle(M, x, y, A, t, epsilon)
    h = t * leading_hessian_angle(M, x, y, A, t, epsilon, exact_distance=False)
    return BoundsReport(t=t, gradient=g, scaled_hessian=h, grad_limit=nA * d, hess_limit=(nA * d) ** 2)


# ---------------------------------------------------------------------------
# exact representation of E_2t derivatives over Gamma_eps

def _node_log_derivatives(M: Manifold, t: float, Z, y, A):
    """First and second derivative in s of log p_t(z, exp_y(s A)) for every node z."""
    from ..fd import derivative
    y = np.asarray(y, dtype=float)
    dmax = float(np.max(mf.distance(M, Z, y)))
    h = 0.05 * t / max(dmax, math.sqrt(t))
    nA = float(np.linalg.norm(mf.project_tangent(M, y, A)))
    hs = h / nA
    P = hk._along(M, y, A, hs * np.arange(-2, 3))
    vals = hk.log_kernel(M, t, Z[None, :, :], P[:, None, :])
    return derivative(vals, 1, hs), derivative(vals, 2, hs)


def _representation_weights(M, x, y, t, eps, nodes):
    span = min(eps, SPAN_SQRT_T * math.sqrt(t))
    pts, vol, _, _ = gamma_grid(M, x, y, eps, span, nodes)
    # e^{-h/t} k(t,x,z) k(t,y,z) = (2 pi t)^n p_t(x,z) p_t(z,y)
    logw = hk.log_kernel(M, t, x, pts) + hk.log_kernel(M, t, pts, y)
    w = np.exp(logw - logw.max()) * vol
    return pts, w / w.sum()


def _rep_rhs(M, x, y, A, t, eps, nodes, kind):
    pts, w = _representation_weights(M, x, y, t, eps, nodes)
    d1, d2 = _node_log_derivatives(M, t, pts, y, A)
    ell = t * d1
    if kind == "grad":
        return float(-2.0 * np.dot(w, ell))
    dell = t * d2
    mean = np.dot(w, ell)
    var = np.dot(w, (ell - mean) ** 2)
    return float(-2.0 / t * var - 2.0 * np.dot(w, dell))


def _representation(M, x, y, A, t, epsilon, nodes, kind, strict):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    limit = default_epsilon(M, x, y, include_endpoints=False)
    eps = limit if epsilon is None else float(epsilon)
    if eps > limit * (1 + 1e-12):
        raise EpsilonTooLargeError(
            f"epsilon = {eps:.6g} exceeds the admissible {limit:.6g} by {eps - limit:.3g}")
    if kind == "grad":
        lhs = hk.grad_energy_t(M, 2 * t, x, y, A)
    else:
        lhs = hk.hess_energy_t(M, 2 * t, x, y, A)
    rhs = _rep_rhs(M, x, y, A, t, eps, nodes, kind)
    fine = _rep_rhs(M, x, y, A, t, eps, 2 * nodes - 1, kind)
    nA = float(np.linalg.norm(mf.project_tangent(M, y, A)))
    d = float(mf.distance(M, x, y))
    scale = max(abs(lhs), nA * max(d, 1.0) if kind == "grad" else nA**2)
    rep = RepresentationReport(lhs=float(lhs), rhs=rhs, residual=abs(lhs - rhs) / scale,
                               refinement_delta=abs(fine - rhs) / scale, t=float(t),
                               epsilon=eps, nodes=nodes)
    if strict and not rep.resolved:
        raise QuadratureResolutionError(
            f"refining the Gamma_eps grid moved the right-hand side by {rep.refinement_delta:.3g} (relative)")
    return rep


def representation_check_grad(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None,
                              nodes: int = GRID_NODES, strict: bool = False) -> RepresentationReport:
    """grad_A E_2t(x, y) against -2 <l> over Gamma_eps with exact k and l."""
    return _representation(M, x, y, A, t, epsilon, nodes, "grad", strict)


def representation_check_hess(M: Manifold, x, y, A, t: float, epsilon: Optional[float] = None,
                              nodes: int = GRID_NODES, strict: bool = False) -> RepresentationReport:
    """Hess_AA E_2t(x, y) against -(2/t)(<l^2> - <l>^2) - 2 <grad_A l>."""
    return _representation(M, x, y, A, t, epsilon, nodes, "hess", strict)


# ---------------------------------------------------------------------------
# bridge midpoint law, limit measure, sublevel volumes

def bridge_midpoint_density(M: Manifold, x, y, t: float, z) -> np.ndarray:
    """Density of the Brownian-bridge midpoint: p_{t/2}(x,z) p_{t/2}(z,y) / p_t(x,y)."""
    z = np.asarray(z, dtype=float)
    logv = (hk.log_kernel(M, 0.5 * t, x, z) + hk.log_kernel(M, 0.5 * t, z, y)
            - hk.log_kernel(M, t, x, y))
    return np.exp(logv)


def bridge_ratio_deviation(M: Manifold, x, y, t: float, epsilon: Optional[float] = None) -> float:
    """sup over the Gamma_eps nodes of |nu_t / mu_t - 1|."""
    mu = mu_t(M, x, y, t, epsilon)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hmin = 0.5 * float(mf.energy(M, x, y))
    log_nu = (hk.log_kernel(M, 0.5 * t, x, mu.nodes) + hk.log_kernel(M, 0.5 * t, mu.nodes, y)
              - hk.log_kernel(M, t, x, y))
    log_mu = (np.log(mf.h0(M, x, mu.nodes) * mf.h0(M, y, mu.nodes))
              - 2.0 * (h_function(M, x, y, mu.nodes) - hmin) / t - mu.log_norm)
    return float(np.max(np.abs(np.expm1(log_nu - log_mu))))


def limit_measure(M: Manifold, x, y) -> LimitMeasure:
    """Weak limit of mu_t as t -> 0."""
    from .expansion import DiagonalForm, limit_weights
    gam = _gamma(M, x, y)
    if isinstance(gam, Equator):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        amp = mf.h0(M, x, gam.nodes) * mf.h0(M, y, gam.nodes)
        w = amp * gam.weights
        return LimitMeasure(points=gam.nodes, weights=w / w.sum())
    forms, amps = [], []
    for rec in gam:
        ev = np.linalg.eigvalsh(rec.hessian_h)
        if np.min(ev) <= 1e-12:
            raise ManifoldError("degenerate Hessian of h at a midpoint; supply a diagonal form")
        forms.append(DiagonalForm((1,) * M.dim))
        amps.append(rec.h0_product / math.sqrt(float(np.prod(ev))))
    w = limit_weights(forms, amps)
    return LimitMeasure(points=np.array([r.z for r in gam]), weights=np.asarray(w))


def _direction_grid(n: int, count: int):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        a = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(a), np.sin(a)], -1), np.full(count, 2 * np.pi / count)
    if n == 3:
        m = max(8, int(math.sqrt(count)))
        c, wc = np.polynomial.legendre.leggauss(m)
        a = 2 * np.pi * (np.arange(2 * m) + 0.5) / (2 * m)
        C, Aa = np.meshgrid(c, a, indexing="ij")
        S = np.sqrt(1 - C**2)
        dirs = np.stack([S * np.cos(Aa), S * np.sin(Aa), C], -1).reshape(-1, 3)
        return dirs, (wc[:, None] * np.full(a.size, 2 * np.pi / a.size)).reshape(-1)
    raise ManifoldError(f"sublevel volumes are implemented for n <= 3, got n = {n}")


def sublevel_volume(M: Manifold, x, y, s: float, epsilon: Optional[float] = None,
                    directions: int = 256, radial_nodes: int = 48) -> float:
    """Volume of {z in Gamma_eps : 2 (h(z) - min h) < s}, in polar normal coordinates."""
    if s < 0:
        raise ValueError(f"s must be non-negative, got {s}")
    if s == 0:
        return 0.0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    eps = _check_epsilon(M, x, y, epsilon)
    gam = _gamma(M, x, y)
    hmin = 0.5 * float(mf.energy(M, x, y))
    gl_x, gl_w = _gauss_unit(radial_nodes)

    def excess(pts):
        return 2.0 * (h_function(M, x, y, pts) - hmin)

    if isinstance(gam, Equator):
        R = M.radius
        e = gam.nodes[0]
        total = 0.0
        for sign in (1.0, -1.0):
            r = _radial_root(lambda rr: excess(mf.exp_map(M, e, np.multiply.outer(sign * rr, gam.pole))), s, eps)
            rr = r * gl_x
            total += float(r * np.sum(gl_w * np.cos(rr / R) ** (M.dim - 1)))
        return total * gam.total_measure
    n = M.dim
    dirs, dw = _direction_grid(n, directions)
    total = 0.0
    for rec in gam:
        vecs = dirs @ rec.frame
        r = _radial_root(lambda rr: excess(mf.exp_map(M, rec.z, rr[:, None] * vecs)), s, eps, vecs.shape[0])
        rr = r[:, None] * gl_x[None, :]
        jac = mf.exp_jacobian(M, rec.z, rr[..., None] * vecs[:, None, :])
        radial = r * np.sum(gl_w * jac * rr ** (n - 1), axis=-1)
        total += float(np.dot(dw, radial))
    return total


def _gauss_unit(m):
    xg, wg = np.polynomial.legendre.leggauss(m)
    return 0.5 * (xg + 1), 0.5 * wg


def _radial_root(fun, s, eps, count=None, iters=80):
    """Vectorised bisection for the radius where the excess reaches s (capped at eps)."""
    shape = () if count is None else (count,)
    lo = np.zeros(shape)
    hi = np.full(shape, eps)
    inside = fun(hi) < s
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < s
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(inside, eps, 0.5 * (lo + hi))
