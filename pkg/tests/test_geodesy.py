import math
import warnings
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatcut import geodesy as gd
from heatcut import manifold as mf
from heatcut.manifold import Circle, FlatTorus, ManifoldError, Sphere

from conftest import TWO_PI, sph


def brute_cut_distance(periods, theta, rmax=40.0, steps=40000):
    """First r at which another lattice image becomes closer than the straight segment."""
    r = np.linspace(1e-6, rmax, steps)
    p = r[:, None] * theta[None, :]
    best = np.full(r.size, np.inf)
    for k in product(range(-2, 3), repeat=2):
        if any(k):
            best = np.minimum(best, np.linalg.norm(p - np.asarray(k) * periods, axis=-1))
    return float(r[np.argmax(best < r)])


@given(st.floats(0.0, TWO_PI))
def test_torus_cut_distance_against_scan(a):
    periods = np.array([TWO_PI, 2 * TWO_PI])
    M = FlatTorus(tuple(periods))
    theta = np.array([math.cos(a), math.sin(a)])
    ref = brute_cut_distance(periods, theta, rmax=8.0, steps=80000)
    assert gd.cut_distance(M, np.zeros(2), theta) == pytest.approx(ref, abs=2e-4)


def test_minimal_geodesics_counts(torus):
    x = np.zeros(2)
    assert len(gd.minimal_geodesics(torus, x, np.array([1.0, 0.5]))) == 1
    assert len(gd.minimal_geodesics(torus, x, np.array([math.pi, 0.5]))) == 2
    assert len(gd.minimal_geodesics(torus, x, np.array([math.pi, math.pi]))) == 4
    eq = gd.minimal_geodesics(Sphere(2, 1.0), sph(0.0), sph(math.pi))
    assert isinstance(eq, gd.Equator)
    assert eq.weights.sum() == pytest.approx(TWO_PI)
    with pytest.raises(ManifoldError):
        gd.minimal_geodesics(torus, x, x)


def test_near_tie_warns(torus):
    with pytest.warns(gd.NearTieWarning):
        gd.minimal_geodesics(torus, np.zeros(2), np.array([math.pi - 1e-7, 0.0]))


def test_midpoint_hessian_and_frame():
    M = Sphere(2, 1.0)
    rec = gd.midpoint_set(M, sph(0.0), sph(2.0))[0]
    assert np.allclose(rec.z, sph(1.0))
    assert np.diag(rec.hessian_h) == pytest.approx([2.0, 2.0 / math.tan(1.0)])
    assert np.allclose(rec.frame @ rec.frame.T, np.eye(2), atol=1e-12)


def test_h_minimum_on_midpoints(torus):
    x, y = np.zeros(2), np.array([math.pi, 0.0])
    z = np.array([[math.pi / 2, 0.0], [-math.pi / 2, 0.0], [0.5, 0.3]])
    h = gd.h_function(torus, x, y, z)
    assert h[0] == pytest.approx(math.pi**2 / 4)
    assert h[1] == pytest.approx(math.pi**2 / 4)
    assert h[2] > h[0]


def test_two_midpoint_weight_log_ratio(torus):
    # far and near midpoints of the two geodesics to y = (pi - delta, 0)
    delta, t = 0.2, 0.05
    x, y = np.zeros(2), np.array([math.pi - delta, 0.0])
    near = np.array([(math.pi - delta) / 2, 0.0])
    far = np.array([(math.pi - delta) / 2 - math.pi, 0.0])
    log_ratio = -2 * (gd.h_function(torus, x, y, far) - gd.h_function(torus, x, y, near)) / t
    predicted = -math.pi * delta * (1 - math.cos(math.pi)) / t
    assert float(log_ratio) == pytest.approx(predicted, rel=0.05)


def test_cut_map_labels(torus):
    x = np.zeros(2)
    labels = []
    for k in range(360):
        a = TWO_PI * k / 360
        labels.append(gd.classify_theta(torus, x, np.array([math.cos(a), math.sin(a)])).label)
    r = [k for k, lab in enumerate(labels) if lab == "R"]
    assert r == [45, 135, 225, 315]
    assert set(labels) == {"P", "R"}


def test_sphere_directions_are_conjugate():
    c = gd.classify_theta(Sphere(2, 1.0), sph(0.0), np.array([1.0, 0.0, 0.0]))
    assert c.label == "C"
    assert c.continuum and c.n_associates == -1
    assert c.conjugacy.saturated


def test_associated_direction_on_torus(torus):
    theta = np.array([math.cos(0.3), math.sin(0.3)])
    assoc, continuum = gd.associated_directions(torus, np.zeros(2), theta)
    assert not continuum and len(assoc) == 1
    assert np.allclose(assoc[0], [-math.cos(0.3), math.sin(0.3)])


@pytest.mark.parametrize("d", [0.5, 1.0, math.pi / 2, 2.5])
def test_parity_on_sphere(d):
    M = Sphere(2, 1.0)
    N = sph(0.0)
    g = gd.minimal_geodesics(M, N, sph(d))[0]
    xi = gd.transverse_directions(M, N, g.direction)[0]
    c = gd.conjugacy_order(M, g, xi)
    h = gd.h_constancy_order(M, N, sph(d), g.point(M, d / 2), xi)
    assert (c.order, h.order) == (0, 1)


def test_parity_saturates_at_antipode():
    M = Sphere(2, 1.0)
    N = sph(0.0)
    g = gd._sphere_geodesic(M, N, np.array([1.0, 0.0, 0.0]), math.pi)
    xi = np.array([0.0, 1.0, 0.0])
    c = gd.conjugacy_order(M, g, xi)
    h = gd.h_constancy_order(M, N, -N, sph(math.pi / 2), xi)
    assert c.saturated and h.saturated
    assert str(c) == ">= 4"


def test_distance_to_cut():
    M = Circle(1.0)
    assert float(gd.distance_to_cut(M, np.array([0.0]), np.array([1.0]))) == pytest.approx(math.pi - 1.0)
    T = FlatTorus((TWO_PI, TWO_PI))
    assert float(gd.distance_to_cut(T, np.zeros(2), np.array([1.0, 2.5]))) == pytest.approx(math.pi - 2.5)
