import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatcut import cutanalysis as ca
from heatcut import geodesy as gd
from heatcut import manifold as mf
from heatcut.manifold import Circle, FlatTorus, ManifoldError, Sphere

from conftest import TWO_PI, sph

X0 = np.zeros(2)


def test_richardson_removes_linear_term():
    assert ca.richardson([0.04, 0.02], [1 + 2 * 0.04, 1 + 2 * 0.02]) == pytest.approx(1.0)


@pytest.mark.parametrize("M,x", [(Circle(1.0), np.array([0.0])), (Sphere(2, 1.0), sph(0.0))])
def test_antipodal_constant(M, x):
    val = ca.scaled_antipodal_hessian(M, x)
    assert val == pytest.approx(ca.sphere_antipodal_hessian(M.dim), rel=0.02)


def test_regular_hessian_matches_closed_form():
    S = Sphere(2, 1.0)
    y = sph(2.0)
    assert ca.regular_hessian(S, sph(0.0), y, np.array([0.0, 1.0, 0.0])) == pytest.approx(2 / math.tan(2.0), rel=1e-5)
    radial = np.array([math.cos(2.0), 0.0, -math.sin(2.0)])
    assert ca.regular_hessian(S, sph(0.0), y, radial) == pytest.approx(1.0, rel=1e-5)
    with pytest.raises(ManifoldError):
        ca.regular_hessian(S, sph(0.0), sph(math.pi), radial)


def test_rho_example(torus):
    e1 = np.array([1.0, 0.0])
    rec = ca.rho_on_P(torus, X0, e1, e1)
    assert rec.rho == pytest.approx(-math.pi**2)
    assert rec.phi == pytest.approx(math.pi) and rec.F == pytest.approx(1.0)
    assert ca.rho_total(torus, X0, e1, e1) == pytest.approx(-2 * math.pi**2)


@given(st.floats(-0.7, 0.7), st.floats(-math.pi, math.pi))
def test_rho_matches_jump_oracle(a, b):
    M = FlatTorus((TWO_PI, 2 * TWO_PI))
    theta = np.array([math.cos(a), math.sin(a)])
    if gd.classify_theta(M, X0, theta).label != "P":
        return
    A = np.array([math.cos(b), math.sin(b)])
    oracle = ca.jump_oracle(M, X0, theta, A)
    assert ca.rho_total(M, X0, theta, A) == pytest.approx(oracle, rel=0.01, abs=1e-9)


def test_rho_tangent_direction_vanishes(torus):
    theta = np.array([math.cos(0.3), math.sin(0.3)])
    assert abs(ca.rho_total(torus, X0, theta, np.array([0.0, 1.0]))) < 1e-10


def test_rho_refuses_non_p(torus):
    with pytest.raises(ManifoldError):
        ca.rho_on_P(torus, X0, np.array([1.0, 1.0]) / math.sqrt(2), np.array([1.0, 0.0]))


def test_mollified_pairing_tends_to_singular_measure(torus):
    A = np.array([1.0, 0.0])
    c, r = np.array([math.pi, 0.3]), 0.5

    def bump(Y):
        d = (np.asarray(Y) - c + math.pi) % TWO_PI - math.pi
        q = np.sum(d**2, -1) / r**2
        out = np.zeros(q.shape)
        m = q < 1
        out[m] = np.exp(-1 / (1 - q[m]))
        return out

    sing = ca.singular_measure(torus, X0, A, count=2000).pair(bump)
    moll = ca.mollified_pairing(torus, X0, A, bump, 0.005, c, r)
    assert moll == pytest.approx(sing, rel=0.01)


def test_classifier_cut_and_regular(torus):
    rep = ca.blowup_classifier(torus, X0, np.array([math.pi, 1.0]))
    assert rep.verdict == "cut"
    assert -1.1 <= rep.exponent <= -0.9
    S = Sphere(2, 1.0)
    rep = ca.blowup_classifier(S, sph(0.0), sph(2.0))
    assert rep.verdict == "non_cut"
    d = rep.to_dict()
    assert set(d) == {"t_grid", "hess_norms", "exponent", "verdict", "terminal_hessian"}


def test_energy_hessian_flat(torus):
    assert float(ca.energy_hessian(torus, X0, np.array([1.0, 2.0]), np.array([0.6, 0.8]))) == pytest.approx(1.0)
