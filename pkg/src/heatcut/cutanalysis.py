"""Energy Hessians across the cut locus: blow-up rates, the singular part and its density.

The Hessian of E_t(x, .) stays bounded as t -> 0 away from Cut(x) and grows
like 1/t at cut points. Its limit on P-directions is a measure carried by
the cut hypersurface; rho_on_P gives its density in polar coordinates and
jump_oracle recomputes it from one-sided gradients of the exact distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import heatkernel as hk
from . import manifold as mf
from .fd import derivative
from .geodesy import (Equator, Geodesic, classify_theta, cut_distance, cut_point,
                      hessian_h_eigenvalues, midpoint_record, minimal_geodesics)
from .laplace.measure import grad_energy_second_slot, sublevel_volume  # noqa: F401
from .manifold import Circle, FlatTorus, Manifold, ManifoldError, Sphere

DEFAULT_T_GRID = (0.04, 0.02, 0.01, 0.005)
CUT_SLOPE = -0.4
CAUCHY_RTOL = 0.05


@dataclass
class BlowupReport:
    t_grid: List[float]
    hess_norms: List[float]
    exponent: float
    verdict: str
    terminal_hessian: np.ndarray
    frame: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"t_grid": list(self.t_grid), "hess_norms": list(self.hess_norms),
                "exponent": self.exponent, "verdict": self.verdict,
                "terminal_hessian": self.terminal_hessian.tolist()}


@dataclass
class RhoRecord:
    theta: np.ndarray
    d_theta: float
    rho: float
    psi: float
    psi_tilde: float
    phi: float
    F: float


@dataclass
class SingularMeasure:
    thetas: np.ndarray
    cut_points: np.ndarray
    densities: np.ndarray
    weights: np.ndarray

    def pair(self, f: Callable) -> float:
        """int f(q(theta)) rho(theta) dtheta by the stored direction quadrature.

        Cut points are in canonical coordinates ([0, L) on tori), so f must
        respect the periodicity of the model.
        """
        return float(np.sum(self.weights * self.densities * f(self.cut_points)))


# ---------------------------------------------------------------------------
# closed forms and extrapolation

def sphere_antipodal_hessian(n: int) -> float:
    """lim t Hess_AA E_t at an antipodal pair of the unit S^n, for unit A."""
    if n < 1:
        raise ValueError("n must be positive")
    return -math.pi**2 / n


def richardson(ts: Sequence[float], values: Sequence[float]) -> float:
    """Value at t = 0 of the line through the two samples with the smallest t."""
    order = np.argsort(ts)
    t0, t1 = ts[order[0]], ts[order[1]]
    f0, f1 = values[order[0]], values[order[1]]
    return float((t1 * f0 - t0 * f1) / (t1 - t0))


def scaled_antipodal_hessian(M: Manifold, x, t_grid=(0.04, 0.02), A=None) -> float:
    """Richardson limit of t Hess_AA E_t(x, -x) over t_grid."""
    x = np.asarray(x, dtype=float)
    y = antipode(M, x)
    if A is None:
        A = mf.tangent_basis(M, y)[0]
    vals = [t * hk.hess_energy_t(M, t, x, y, A) for t in t_grid]
    return richardson(list(t_grid), vals)


def antipode(M: Manifold, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if isinstance(M, Sphere):
        return -x
    if isinstance(M, Circle):
        return np.mod(x + math.pi * M.radius, M.length)
    return np.mod(x + 0.5 * np.asarray(M.periods), M.periods)


# ---------------------------------------------------------------------------
# regular part

def energy_hessian(M: Manifold, x, y, A) -> np.ndarray:
    """Hess_AA E(x, .) at y off the cut locus, in closed form."""
    y = np.asarray(y, dtype=float)
    A = mf.project_tangent(M, y, A)
    v = -mf.log_map(M, y, np.asarray(x, dtype=float))
    d = np.linalg.norm(v, axis=-1)
    rad, trans = mf.radial_energy_hessian(M, d)
    u = v / np.where(d > 0, d, 1.0)[..., None]
    a_rad = np.sum(A * u, axis=-1)
    a2 = np.sum(A * A, axis=-1)
    return rad * a_rad**2 + trans * (a2 - a_rad**2)


def regular_hessian(M: Manifold, x, y, A, h: float = 1e-4) -> float:
    """2 [Hess_AA E(z, y) - sum_j (d_uj grad_A E(z, y))^2] at the midpoint z of a non-cut pair.

    u are coordinates at z in which 2h - E is sum u_j^2 to second order,
    i.e. u_j = sqrt(b_j) z_j along the eigenvectors of Hess h.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    geos = minimal_geodesics(M, x, y)
    if isinstance(geos, Equator) or len(geos) != 1:
        raise ManifoldError("y lies in the cut locus of x; the regular formula does not apply")
    rec = midpoint_record(M, geos[0])
    b, V = np.linalg.eigh(rec.hessian_h)
    hzy = float(energy_hessian(M, rec.z, y, A))
    steps = h * np.arange(-2, 3)
    acc = 0.0
    for j in range(M.dim):
        e = V[:, j] @ rec.frame
        pts = mf.exp_map(M, rec.z, np.multiply.outer(steps, e))
        g = grad_energy_second_slot(M, pts, y, A)
        acc += float(derivative(g, 1, h)) ** 2 / b[j]
    return 2.0 * (hzy - acc)


# ---------------------------------------------------------------------------
# blow-up classifier

def blowup_classifier(M: Manifold, x, y, t_grid: Sequence[float] = DEFAULT_T_GRID, frame=None,
                      slope_cut: float = CUT_SLOPE, cauchy_rtol: float = CAUCHY_RTOL) -> BlowupReport:
    """Classify y as cut / non-cut for x from the growth of the E_t Hessian as t decreases.

    The slope of log ||Hess E_t|| against log t over the four smallest t
    decides: slope <= slope_cut means cut; a Cauchy tail (last relative
    change <= cauchy_rtol with slope above slope_cut / 2) means non-cut.
    """
    ts = sorted((float(t) for t in t_grid), reverse=True)
    if len(ts) < 2:
        raise ValueError("need at least two times")
    y = np.asarray(y, dtype=float)
    if frame is None:
        frame = mf.tangent_basis(M, y)
    mats = [hk.hessian_matrix_energy_t(M, t, x, y, frame) for t in ts]
    norms = [float(np.max(np.abs(np.linalg.eigvalsh(H)))) for H in mats]
    use = slice(max(0, len(ts) - 4), len(ts))
    lt = np.log(ts[use])
    ln = np.log(np.maximum(norms[use], 1e-300))
    slope = float(np.polyfit(lt, ln, 1)[0])
    last = abs(norms[-1] - norms[-2]) / max(norms[-1], 1e-300)
    if slope <= slope_cut:
        verdict = "cut"
    elif last <= cauchy_rtol and slope > 0.5 * slope_cut:
        verdict = "non_cut"
    else:
        verdict = "inconclusive"
    return BlowupReport(t_grid=ts, hess_norms=norms, exponent=slope, verdict=verdict,
                        terminal_hessian=mats[-1], frame=np.asarray(frame))


# ---------------------------------------------------------------------------
# singular part on P-directions

def _angle(u, v) -> float:
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(max(-1.0, min(1.0, c)))


def _geodesic(M: Manifold, x, theta, d) -> Geodesic:
    from .geodesy import _flat_geodesic, _sphere_geodesic
    if isinstance(M, Sphere):
        return _sphere_geodesic(M, x, theta, d)
    return _flat_geodesic(M, x, d * theta)


def rho_on_P(M: Manifold, x, theta, A) -> RhoRecord:
    """Density in theta of the singular part of Hess_AA E(x, .) for a P-direction theta.

    rho = -d |A|^2 (cos psi - cos psi~)^2 vol(d, theta)
          / [(1 - cos phi)(1 + H0(x,z) H0(y,z) sqrt(det B~) / (H0(x,z~) H0(y,z~) sqrt(det B)))]
    psi, psi~ are the angles between A and the arrival tangents at the cut
    point y, phi the angle between the two arrival tangents.
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    cls = classify_theta(M, x, theta)
    if cls.label != "P":
        raise ManifoldError(f"direction is labelled {cls.label}, not P")
    d = cls.d_theta
    g = _geodesic(M, x, theta, d)
    gt = _geodesic(M, x, cls.associates[0], d)
    A = mf.project_tangent(M, g.end, A)
    nA = float(np.linalg.norm(A))
    psi = _angle(A, g.arrival) if nA > 0 else 0.0
    psi_t = _angle(A, gt.arrival) if nA > 0 else 0.0
    phi = _angle(g.arrival, gt.arrival)
    rec, rect = midpoint_record(M, g), midpoint_record(M, gt)
    detB = float(np.linalg.det(rec.hessian_h))
    detBt = float(np.linalg.det(rect.hessian_h))
    F = rect.h0_product * math.sqrt(detB) / (rec.h0_product * math.sqrt(detBt))
    vol = float(mf.polar_volume_density(M, x, d, theta))
    num = d * nA**2 * (math.cos(psi) - math.cos(psi_t)) ** 2 * vol
    rho = -num / ((1.0 - math.cos(phi)) * (1.0 + 1.0 / F))
    return RhoRecord(theta=theta, d_theta=d, rho=rho, psi=psi, psi_tilde=psi_t, phi=phi, F=F)


def rho_total(M: Manifold, x, theta, A) -> float:
    """Sum of rho over theta and its associated direction.

    Both preimages of a hypersurface point carry the same polar volume
    factor for the models here, so the plain sum is the pulled-back density.
    """
    r = rho_on_P(M, x, theta, A)
    cls = classify_theta(M, x, theta)
    return r.rho + rho_on_P(M, x, cls.associates[0], A).rho


def _one_sided_gradient(M: Manifold, x, p, frame, h: float = 1e-6) -> np.ndarray:
    steps = h * np.arange(-2, 3)
    out = []
    for e in frame:
        pts = mf.exp_map(M, p, np.multiply.outer(steps, e))
        out.append(float(derivative(mf.energy(M, x, pts), 1, h)))
    return np.asarray(out)


def _cut_map_lift(M: Manifold, x, theta) -> np.ndarray:
    return mf.exp_lift(M, x, cut_distance(M, x, theta) * theta)


def jump_oracle(M: Manifold, x, theta, A, eta: float = 1e-3, step: float = 1e-5) -> float:
    """Singular density of Hess_AA E at the cut point of theta, per unit dtheta.

    Independent of the rho formula: one-sided gradients of the exact energy
    on each side of the cut hypersurface (Richardson in the offset), the
    hypersurface normal from the differential of theta -> cut point, and
    the area factor |d(cut point)/d theta|. Flat models only.
    """
    if isinstance(M, Sphere):
        raise ManifoldError("jump oracle is implemented for flat models")
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    q = cut_point(M, x, theta)
    geos = minimal_geodesics(M, x, q)
    if len(geos) != 2:
        raise ManifoldError(f"cut point has {len(geos)} minimal geodesics; not a hypersurface point")
    n = M.dim
    frame = np.eye(n)
    if n == 1:
        normal = np.array([1.0])
        area = 1.0
    else:
        trans = mf.tangent_basis(M, x, first=theta)[1:]
        cols = []
        for xi in trans:
            vals = np.array([_cut_map_lift(M, x, mf.rotate_direction(theta, xi, k * step))
                             for k in range(-2, 3)])
            cols.append(derivative(vals, 1, step))
        J = np.array(cols).T  # n x (n-1)
        area = math.sqrt(float(np.linalg.det(J.T @ J)))
        # normal: orthogonal complement of the tangent space of the hypersurface
        U, _, _ = np.linalg.svd(J, full_matrices=True)
        normal = U[:, -1]
    A = np.asarray(A, dtype=float)

    def side(sign):
        g1 = _one_sided_gradient(M, x, mf.exp_map(M, q, sign * eta * normal), frame)
        g2 = _one_sided_gradient(M, x, mf.exp_map(M, q, sign * 2 * eta * normal), frame)
        return 2 * g1 - g2

    jump = side(+1.0) - side(-1.0)
    return float(np.dot(A, jump) * np.dot(A, normal) * area)


def singular_measure(M: Manifold, x, A, count: int = 720) -> SingularMeasure:
    """rho sampled on a uniform grid of directions (P-directions only; others get 0)."""
    if M.dim != 2:
        raise ManifoldError("singular_measure samples the direction circle of a surface")
    ang = 2 * np.pi * (np.arange(count) + 0.5) / count
    thetas = np.stack([np.cos(ang), np.sin(ang)], -1)
    x = np.asarray(x, dtype=float)
    dens, pts = [], []
    for th in thetas:
        pts.append(cut_point(M, x, th))
        try:
            dens.append(rho_on_P(M, x, th, A).rho)
        except ManifoldError:
            dens.append(0.0)
    return SingularMeasure(thetas=thetas, cut_points=np.array(pts), densities=np.array(dens),
                           weights=np.full(count, 2 * np.pi / count))


# ---------------------------------------------------------------------------
# mollified pairing

def _graded_axis(lo: float, hi: float, cut: Optional[float], scale: float, per_panel: int = 8):
    """Composite Gauss-Legendre nodes on [lo, hi], graded geometrically toward `cut`."""
    edges = {lo, hi}
    if cut is not None and lo < cut < hi:
        edges.add(cut)
        k = 0
        while True:
            off = scale * 0.5 * 2.0**k
            if off > hi - lo:
                break
            for e in (cut - off, cut + off):
                if lo < e < hi:
                    edges.add(e)
            k += 1
    else:
        edges.update(np.linspace(lo, hi, 9)[1:-1])
    edges = np.array(sorted(edges))
    g, w = np.polynomial.legendre.leggauss(per_panel)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * g + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _hess_field(M: Manifold, t: float, x, Y, A) -> np.ndarray:
    """Hess_AA E_t(x, y) for every row of Y, A an array of tangent vectors at Y."""
    d = float(np.max(mf.distance(M, x, Y)))
    h = 0.05 * t / max(d, math.sqrt(t))
    nA = np.linalg.norm(A, axis=-1)
    steps = np.arange(-2, 3) * h
    P = mf.exp_map(M, Y[None, :, :], steps[:, None, None] * A[None, :, :] / nA[None, :, None])
    vals = hk.log_kernel(M, t, np.asarray(x, dtype=float), P)
    return -t * derivative(vals, 2, h) * nA**2


def mollified_pairing(M: Manifold, x, A, phi: Callable, t: float, center, radius: float) -> float:
    """int phi (Hess_AA E_t - regular part) over a neighbourhood of the cut locus.

    phi must be supported in the box (flat models) or the geodesic ball
    (spheres) of the given radius about `center`. On a flat torus A is a
    constant vector; on a sphere it is the parallel field along geodesics
    from `center` extending the tangent vector A at `center`.
    """
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    if isinstance(M, FlatTorus):
        axes = []
        for i, L in enumerate(M.periods):
            c = float(center[i])
            cut = x[i] + 0.5 * L
            cut = cut - L * round((cut - c) / L)
            axes.append(_graded_axis(c - radius, c + radius, cut, t))
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wgrid = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        Y = np.stack([g.reshape(-1) for g in grids], -1)
        W = np.prod(np.stack([w.reshape(-1) for w in wgrid], -1), axis=-1)
        Aarr = np.broadcast_to(np.asarray(A, dtype=float), Y.shape)
        f = phi(Y)
        keep = f != 0
        Yk = np.mod(Y[keep], M.periods)
        integrand = f[keep] * (_hess_field(M, t, x, Yk, Aarr[keep]) - energy_hessian(M, x, Yk, Aarr[keep]))
        return float(np.sum(W[keep] * integrand))
    if isinstance(M, Sphere) and M.dim == 2:
        R = M.radius
        basis = mf.tangent_basis(M, center)
        r, wr = _radial_nodes(radius, t)
        m = 128
        ang = 2 * np.pi * (np.arange(m) + 0.5) / m
        U = np.cos(ang)[:, None] * basis[0] + np.sin(ang)[:, None] * basis[1]
        RR, UU = r[:, None, None], U[None, :, :]
        Y = (np.cos(RR / R) * center + R * np.sin(RR / R) * UU).reshape(-1, 3)
        A0 = mf.project_tangent(M, center, A)
        a_u = (U @ A0)[None, :, None]
        # parallel transport of A0 along the radial geodesic
        Ay = (A0 - a_u * UU + a_u * (np.cos(RR / R) * UU - np.sin(RR / R) * center / R)).reshape(-1, 3)
        W = (wr[:, None] * R * np.sin(r[:, None] / R) * np.full(m, 2 * np.pi / m)[None, :]).reshape(-1)
        f = phi(Y)
        keep = f != 0
        integrand = f[keep] * (_hess_field(M, t, x, Y[keep], Ay[keep]) - energy_hessian(M, x, Y[keep], Ay[keep]))
        return float(np.sum(W[keep] * integrand))
    raise ManifoldError("mollified pairing supports flat tori and the 2-sphere")


def _radial_nodes(radius: float, t: float, per_panel: int = 8):
    edges = [0.0]
    e = 0.25 * t
    while e < radius:
        edges.append(e)
        e *= 2.0
    edges.append(radius)
    g, w = np.polynomial.legendre.leggauss(per_panel)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * g + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)
