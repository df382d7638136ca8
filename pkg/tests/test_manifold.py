import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatcut import manifold as mf
from heatcut.manifold import Circle, FlatTorus, ManifoldError, Sphere

from conftest import TWO_PI, sph

angles = st.floats(0.0, math.pi, allow_nan=False)
azimuths = st.floats(-math.pi, math.pi, allow_nan=False)
coords = st.floats(0.0, 10.0, allow_nan=False)


def brute_torus_distance(periods, x, y):
    best = math.inf
    for k in product(range(-3, 4), repeat=len(periods)):
        v = np.asarray(y) - np.asarray(x) + np.asarray(k) * np.asarray(periods)
        best = min(best, float(np.linalg.norm(v)))
    return best


@given(coords, coords, coords, coords)
def test_torus_distance_matches_lattice_search(a, b, c, d):
    M = FlatTorus((3.0, 7.5))
    x = np.mod([a, b], M.periods)
    y = np.mod([c, d], M.periods)
    assert mf.distance(M, x, y) == pytest.approx(brute_torus_distance(M.periods, x, y), abs=1e-12)


@given(angles, azimuths, angles, azimuths)
def test_sphere_distance_is_arc_length(t1, p1, t2, p2):
    M = Sphere(2, 2.0)
    x, y = sph(t1, p1, 2.0), sph(t2, p2, 2.0)
    c = np.clip(np.dot(x, y) / 4.0, -1, 1)
    assert mf.distance(M, x, y) == pytest.approx(2.0 * math.acos(c), abs=1e-7)


@given(angles, azimuths, st.floats(0.01, 3.0), azimuths)
def test_sphere_exp_log_round_trip(t1, p1, r, a):
    M = Sphere(2, 1.0)
    x = sph(t1, p1)
    basis = mf.tangent_basis(M, x)
    v = r * (math.cos(a) * basis[0] + math.sin(a) * basis[1])
    y = mf.exp_map(M, x, v)
    assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(mf.log_map(M, x, y), v, atol=1e-8)


@given(coords, st.floats(-3.0, 3.0))
def test_circle_distance_symmetric_and_bounded(a, b):
    M = Circle(1.5)
    x = np.array([a % M.length])
    y = np.array([(a + b) % M.length])
    d = float(mf.distance(M, x, y))
    assert d == pytest.approx(float(mf.distance(M, y, x)), abs=1e-12)
    assert d <= math.pi * 1.5 + 1e-12
    assert d == pytest.approx(min(abs(b), M.length - abs(b)), abs=1e-9)


def test_exp_jacobian_matches_numerical_determinant():
    M = Sphere(2, 1.0)
    x = sph(0.4, 0.2)
    basis = mf.tangent_basis(M, x)
    v = 1.3 * basis[0] + 0.4 * basis[1]
    h = 1e-6
    cols = []
    for e in basis:
        plus, minus = mf.exp_map(M, x, v + h * e), mf.exp_map(M, x, v - h * e)
        cols.append((plus - minus) / (2 * h))
    J = np.array(cols)
    det = math.sqrt(np.linalg.det(J @ J.T))
    assert float(mf.exp_jacobian(M, x, v)) == pytest.approx(det, rel=1e-7)


def test_h0_flat_is_one_and_sphere_grows():
    assert float(mf.h0(FlatTorus((TWO_PI, TWO_PI)), np.zeros(2), np.array([1.0, 2.0]))) == pytest.approx(1.0)
    M = Sphere(2, 1.0)
    N = sph(0.0)
    assert float(mf.h0(M, N, sph(2.0))) == pytest.approx(math.sqrt(2.0 / math.sin(2.0)))
    with pytest.raises(ManifoldError):
        mf.h0(M, N, -N)


def test_radial_energy_hessian():
    rad, trans = mf.radial_energy_hessian(Sphere(2, 1.0), 1.0)
    assert rad == 1.0
    assert trans == pytest.approx(1.0 / math.tan(1.0))
    rad, trans = mf.radial_energy_hessian(FlatTorus((1.0, 1.0)), 0.3)
    assert (rad, trans) == (1.0, 1.0)


def test_model_round_trip_and_errors():
    for M in (Circle(2.0), Sphere(3, 0.5), FlatTorus((1.0, 2.0))):
        assert mf.model_from_dict(mf.model_to_dict(M)) == M
    with pytest.raises(ManifoldError):
        mf.model_from_dict({"model": "hyperbolic"})
    with pytest.raises(ManifoldError):
        Sphere(2, -1.0)
    with pytest.raises(ManifoldError):
        mf.validate_point(Sphere(2, 1.0), np.array([1.0, 1.0, 0.0]))


def test_directional_derivatives_vanish_at_antipode():
    M = Sphere(2, 1.0)
    N = sph(0.0)
    basis = mf.tangent_basis(M, N)
    norms = mf.exp_directional_derivatives(M, N, math.pi, basis[0], basis[1], 4)
    assert np.all(norms < 1e-6)
    norms = mf.exp_directional_derivatives(M, N, 1.0, basis[0], basis[1], 2)
    assert norms[0] == pytest.approx(math.sin(1.0), rel=1e-6)
