"""Exact heat kernels for dt u = (1/2) Lap u and derived energy quantities.

Kernels are computed in the log domain because near-cut values at small t
underflow double precision (exp(-pi^2/(2t)) for t < 0.007).

Methods
-------
circle, torus
    Wrapped Gaussian image sums, factorised over coordinates; the circle
    also has a Fourier series used for cross-validation.
sphere S^2
    Exact image integral in the geodesic angle (odd-to-even dimensional
    descent of the S^3 kernel), Gauss-Legendre after a substitution that
    removes the square-root endpoint singularity; the Legendre spectral
    series is used near the diagonal and for large t.
sphere S^3
    Closed image sum; spectral series near the diagonal and for large t.
sphere S^n, other n
    Gegenbauer spectral series.

Energy derivatives are central differences along geodesics through y.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_gegenbauer, eval_legendre, gammaln, logsumexp

from . import manifold as mf
from .fd import derivative
from .manifold import Circle, FlatTorus, Manifold, Sphere

SPECTRAL_TERM_CAP = 1_000_000
SPECTRAL_CUTOFF = 1e-18
IMAGE_RTOL = 1e-16
QUAD_NODES = 256


class KernelError(ValueError):
    pass


class KernelTruncationError(KernelError):
    pass


class KernelConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelEvaluation:
    t: float
    value: float
    truncation_error_bound: float
    log_value: float
    method: str


def _check_t(t):
    if not np.all(np.asarray(t) > 0):
        raise KernelError(f"time must be positive, got {t}")


# ---------------------------------------------------------------------------
# wrapped Gaussians

def _image_range(t: float, L: float) -> int:
    # beyond K images every term is below IMAGE_RTOL times the k = 0 term
    return int(math.ceil(math.sqrt(2.0 * t * -math.log(IMAGE_RTOL)) / L + 0.5)) + 1


def _log_wrapped_gaussian(u, L: float, t: float) -> np.ndarray:
    u = mf._wrap(np.asarray(u, dtype=float), L)
    K = _image_range(t, L)
    k = np.arange(-K, K + 1, dtype=float)
    expo = -((u[..., None] + k * L) ** 2) / (2.0 * t)
    return logsumexp(expo, axis=-1) - 0.5 * math.log(2.0 * math.pi * t)


def _wrapped_tail_bound(L: float, t: float) -> float:
    """Relative bound on the omitted images of one wrapped Gaussian factor."""
    K = _image_range(t, L)
    a = (K + 0.5) * L
    # the k = 0 term is at least exp(-L^2 / (8t))
    return 2.0 * math.exp(-(a * a - L * L / 4.0) / (2.0 * t)) * (1.0 + t / (a * L))


def circle_kernel_fourier(radius: float, t: float, d) -> np.ndarray:
    """(1 / 2 pi R) sum_m exp(-m^2 t / 2R^2) cos(m d / R)."""
    _check_t(t)
    m_max = int(math.ceil(math.sqrt(2.0 * radius**2 * -math.log(SPECTRAL_CUTOFF) / t))) + 1
    if m_max > SPECTRAL_TERM_CAP:
        raise KernelTruncationError(
            f"Fourier series needs {m_max} terms, above the cap of {SPECTRAL_TERM_CAP}")
    m = np.arange(1, m_max + 1, dtype=float)
    d = np.asarray(d, dtype=float)
    terms = np.exp(-m**2 * t / (2 * radius**2)) * np.cos(np.multiply.outer(d, m) / radius)
    return (1.0 + 2.0 * terms.sum(axis=-1)) / (2.0 * math.pi * radius)


# ---------------------------------------------------------------------------
# spheres

def _sphere_volume_log(n: int, R: float) -> float:
    return math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1)) + n * math.log(R)


def _spectral_lmax(n: int, T: float, cap: int) -> int:
    """First l with dim(H_l) exp(-l(l+n-1) T) below the cutoff."""
    # dim(H_l) <= (2l + n)^(n-1), so this l is an upper bound for the stopping index
    target = -math.log(SPECTRAL_CUTOFF)
    l = int(math.ceil(math.sqrt(target / T))) + 1
    while True:
        logdim = (n - 1) * math.log(2 * l + n)
        if logdim - l * (l + n - 1) * T < -target:
            break
        l = int(l * 1.2) + 1
        if l > 10 * cap:
            break
    if l + 1 > cap:
        raise KernelTruncationError(
            f"spectral series needs {l + 1} terms at this t, above the cap of {cap} terms")
    # walk back to the first index that meets the cutoff
    ls = np.arange(0, l + 1, dtype=float)
    logdims = np.log(2 * ls + n - 1) + gammaln(ls + n - 1) - gammaln(ls + 1) - gammaln(n)
    ok = np.nonzero(logdims - ls * (ls + n - 1) * T < -target)[0]
    return int(ok[0]) if ok.size else l


def _log_sphere_spectral(n: int, T: float, theta, cap: int = SPECTRAL_TERM_CAP):
    """log of the unit S^n kernel of dt = Lap at time T, plus a roundoff estimate."""
    theta = np.asarray(theta, dtype=float)
    L = _spectral_lmax(n, T, cap)
    l = np.arange(0, L + 1, dtype=float)
    c = np.cos(theta)[..., None]
    if n == 1:
        poly = np.where(l == 0, 0.5, 1.0) * 2 * np.cos(l * theta[..., None])
        weight = np.exp(-l * l * T)
    elif n == 2:
        poly = eval_legendre(l, c)
        weight = (2 * l + 1) * np.exp(-l * (l + 1) * T)
    else:
        lam = 0.5 * (n - 1)
        poly = eval_gegenbauer(l, lam, c)
        weight = (2 * l + n - 1) / (n - 1) * np.exp(-l * (l + n - 1) * T)
    terms = weight * poly
    total = terms.sum(axis=-1)
    roundoff = 1e-15 * np.abs(terms).sum(axis=-1) + 1e-300
    if np.any(total <= 10 * roundoff):
        raise KernelError("spectral series lost all precision; use an image method")
    logvol = _sphere_volume_log(n, 1.0)
    return np.log(total) - logvol, roundoff / total


@lru_cache(maxsize=8)
def _gauss_legendre_unit(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _s2_image_ks(T: float) -> np.ndarray:
    reach = math.sqrt(4.0 * T * 50.0)
    K = int(math.ceil(reach / (2 * math.pi))) + 1
    return np.arange(-K - 1, K + 1)


def _log_s2_images(T: float, theta, nodes: int = QUAD_NODES) -> np.ndarray:
    """log of the unit S^2 kernel of dt = Lap at time T via the image integral.

    K = sqrt2 e^{T/4} (4 pi T)^{-3/2} sum_k (-1)^k int_theta^pi
        (phi + 2 pi k) exp(-(phi + 2 pi k)^2 / 4T) / sqrt(cos theta - cos phi) dphi
    with phi = theta + u^2, u = sqrt(pi - theta) s, s in [0, 1].
    """
    theta = np.asarray(theta, dtype=float)
    a = np.pi - theta
    s, w = _gauss_legendre_unit(nodes)
    ks = _s2_image_ks(T)
    sa = np.sqrt(np.maximum(a, 0.0))[..., None]
    u = sa * s
    u2 = u * u
    phi = theta[..., None] + u2
    # cos theta - cos phi = 2 sin(a - u^2/2) sin(u^2/2)
    with np.errstate(invalid="ignore", divide="ignore"):
        jac = 2.0 * u * sa / np.sqrt(2.0 * np.sin(a[..., None] - 0.5 * u2) * np.sin(0.5 * u2))
    ref = theta**2
    acc = np.zeros(theta.shape + (nodes,))
    for k in ks:
        shift = phi + 2.0 * np.pi * k
        acc += (-1.0) ** k * shift * np.exp(-(shift**2 - ref[..., None]) / (4.0 * T))
    integral = np.sum(np.where(np.isfinite(jac), w * acc * jac, 0.0), axis=-1)
    # antipodal limit: int dphi / sqrt(cos theta - cos phi) -> pi / sqrt2
    tiny = a < 1e-12
    if np.any(tiny):
        lim = sum((-1.0) ** k * (np.pi + 2 * np.pi * k)
                  * np.exp(-((np.pi + 2 * np.pi * k) ** 2 - np.pi**2) / (4.0 * T)) for k in ks)
        integral = np.where(tiny, lim * np.pi / math.sqrt(2.0), integral)
        ref = np.where(tiny, np.pi**2, ref)
    pref = 0.5 * math.log(2.0) + T / 4.0 - 1.5 * math.log(4.0 * math.pi * T)
    return pref - ref / (4.0 * T) + np.log(integral)


def _log_s3_images(T: float, theta) -> np.ndarray:
    """log of the unit S^3 kernel: e^T (4 pi T)^{-3/2} sum_k (theta + 2 pi k)/sin(theta) e^{-(theta+2 pi k)^2/4T}."""
    theta = np.asarray(theta, dtype=float)
    ks = _s2_image_ks(T)
    ref = theta**2
    num = np.zeros_like(theta)
    dnum = np.zeros_like(theta)
    for k in ks:
        sh = theta + 2 * np.pi * k
        g = np.exp(-(sh**2 - ref) / (4.0 * T))
        num += sh * g
        dnum += (1.0 - sh**2 / (2.0 * T)) * g
    st = np.sin(theta)
    near = np.abs(st) < 1e-6
    ratio = np.where(near, dnum / np.cos(theta), num / np.where(near, 1.0, st))
    return T - 1.5 * math.log(4.0 * math.pi * T) - ref / (4.0 * T) + np.log(ratio)


def _log_sphere(M: Sphere, t: float, theta) -> np.ndarray:
    n, R = M.dim, M.radius
    T = t / (2.0 * R * R)
    theta = np.asarray(theta, dtype=float)
    if n == 1:
        return _log_wrapped_gaussian(theta * R, 2 * np.pi * R, t)
    if n in (2, 3) and T < 1.0:
        near = theta**2 / (4.0 * T) < 8.0
        out = np.empty_like(theta)
        if np.any(near):
            out[near] = _log_sphere_spectral(n, T, theta[near])[0]
        far = ~near
        if np.any(far):
            out[far] = (_log_s2_images if n == 2 else _log_s3_images)(T, theta[far])
        return out - n * math.log(R)
    return _log_sphere_spectral(n, T, theta)[0] - n * math.log(R)


# ---------------------------------------------------------------------------
# public kernel API

def log_kernel(M: Manifold, t: float, x, y) -> np.ndarray:
    """log p_t(x, y), broadcasting over leading axes of x and y."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if isinstance(M, Sphere):
        theta = mf.distance(M, x, y) / M.radius
        return _log_sphere(M, t, np.atleast_1d(theta)).reshape(np.shape(theta))
    if isinstance(M, Circle):
        return _log_wrapped_gaussian((y - x)[..., 0], M.length, t)
    diff = y - x
    out = 0.0
    for i, L in enumerate(M.periods):
        out = out + _log_wrapped_gaussian(diff[..., i], L, t)
    return np.asarray(out)


def _truncation_bound(M: Manifold, t: float, x, y, logp: float) -> float:
    if isinstance(M, Circle):
        return _wrapped_tail_bound(M.length, t) * math.exp(logp)
    if isinstance(M, FlatTorus):
        rel = sum(_wrapped_tail_bound(L, t) for L in M.periods)
        return rel * math.exp(logp)
    n, R = M.dim, M.radius
    T = t / (2 * R * R)
    theta = float(mf.distance(M, x, y)) / R
    if n == 1:
        return _wrapped_tail_bound(2 * np.pi * R, t) * math.exp(logp)
    if n in (2, 3) and T < 1.0 and theta**2 / (4 * T) >= 8.0:
        if n == 3:
            return 1e-15 * math.exp(logp)
        coarse = float(_log_s2_images(T, np.array([theta]), QUAD_NODES // 2)[0])
        return abs(math.expm1(coarse - (logp + n * math.log(R)))) * math.exp(logp)
    _, rel = _log_sphere_spectral(n, T, np.array([theta]))
    return float(rel[0]) * math.exp(logp)


def heat_kernel(M: Manifold, t: float, x, y, cross_check: bool = False) -> KernelEvaluation:
    """p_t(x, y) for single points, with an error estimate."""
    logp = float(log_kernel(M, t, x, y))
    bound = _truncation_bound(M, t, x, y, logp)
    if isinstance(M, Circle):
        method = "wrapped_gaussian"
        if cross_check:
            d = float(mf._wrap(np.asarray(y) - np.asarray(x), M.length)[0])
            other = float(circle_kernel_fourier(M.radius, t, d))
            if abs(other / math.exp(logp) - 1.0) > 1e-12:
                raise KernelConsistencyError(
                    f"wrapped and Fourier circle kernels disagree: {math.exp(logp)!r} vs {other!r}")
    elif isinstance(M, FlatTorus):
        method = "lattice_images"
    else:
        method = "sphere_exact"
    return KernelEvaluation(t=float(t), value=math.exp(logp), truncation_error_bound=bound,
                            log_value=logp, method=method)


# ---------------------------------------------------------------------------
# energies and their derivatives along geodesics through y

def energy_t(M: Manifold, t: float, x, y) -> np.ndarray:
    return -t * log_kernel(M, t, x, y)


def fd_step(M: Manifold, t: float, x, y) -> float:
    """Geodesic step for differentiating E_t in y.

    Near a cut point E_t changes on the length scale t / dist(x, y), so the
    step is 5% of min(sqrt t, t / dist).
    """
    d = float(mf.distance(M, x, y))
    h = 0.05 * t / max(d, math.sqrt(t))
    if h < 1e-7:
        warnings.warn(f"finite-difference step {h:.3g} is small relative to t = {t}", RuntimeWarning)
    return h


def _along(M: Manifold, y, A, offsets):
    y = np.asarray(y, dtype=float)
    A = mf.project_tangent(M, y, A)
    return mf.exp_map(M, y, np.multiply.outer(offsets, A))


def directional_log_derivatives(M: Manifold, t: float, x, y, A, h: float | None = None):
    """(d/ds, d^2/ds^2) of log p_t(x, exp_y(s A)) at s = 0, 5-point stencil."""
    if h is None:
        h = fd_step(M, t, x, y)
    nA = float(np.linalg.norm(A))
    if nA == 0:
        return 0.0, 0.0
    hs = h / nA
    pts = _along(M, y, A, hs * np.arange(-2, 3))
    vals = log_kernel(M, t, np.asarray(x, dtype=float), pts)
    return float(derivative(vals, 1, hs)), float(derivative(vals, 2, hs))


def grad_energy_t(M: Manifold, t: float, x, y, A, h: float | None = None) -> float:
    return -t * directional_log_derivatives(M, t, x, y, A, h)[0]


def hess_energy_t(M: Manifold, t: float, x, y, A, h: float | None = None) -> float:
    return -t * directional_log_derivatives(M, t, x, y, A, h)[1]


def hessian_matrix_energy_t(M: Manifold, t: float, x, y, frame=None, h: float | None = None) -> np.ndarray:
    """Hessian of E_t(x, .) at y in an orthonormal frame, by polarisation."""
    if frame is None:
        frame = mf.tangent_basis(M, y)
    frame = np.asarray(frame, dtype=float)
    k = frame.shape[0]
    Q = np.zeros((k, k))
    for i in range(k):
        Q[i, i] = hess_energy_t(M, t, x, y, frame[i], h)
    for i in range(k):
        for j in range(i + 1, k):
            q = hess_energy_t(M, t, x, y, frame[i] + frame[j], h)
            Q[i, j] = Q[j, i] = 0.5 * (q - Q[i, i] - Q[j, j])
    return Q


def log_pleijel_k(M: Manifold, t: float, x, y) -> np.ndarray:
    n = M.dim
    return 0.5 * n * np.log(2 * np.pi * t) + mf.energy(M, x, y) / t + log_kernel(M, t, x, y)


def pleijel_k(M: Manifold, t: float, x, y) -> np.ndarray:
    """k(t, x, y) = (2 pi t)^(n/2) exp(E/t) p_t(x, y)."""
    return np.exp(log_pleijel_k(M, t, x, y))


def log_grad_l(M: Manifold, t: float, x, y, A, h: float | None = None) -> float:
    """l(t, x, y, A) = t grad_A log p_t(x, y), derivative in y."""
    return t * directional_log_derivatives(M, t, x, y, A, h)[0]


def varadhan_gap(M: Manifold, t: float, x, y) -> float:
    return float(mf.energy(M, x, y) - energy_t(M, t, x, y))
