import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.special import gamma

from heatcut.acceptance import _quad_1d
from heatcut.laplace import expansion as ex
from heatcut.laplace import newton as nw


def test_gaussian_leading_term():
    t = 0.01
    assert ex.diagonal_expansion(ex.DiagonalForm((1,)), t, order=1) == pytest.approx(math.sqrt(math.pi * t))


def test_quartic_leading_term_against_quadrature():
    # Gamma(1/4)/2 t^(1/4), checked by brute-force quadrature at t = 1e-4
    t = 1e-4
    val = ex.diagonal_expansion(ex.DiagonalForm((2,)), t, order=1)
    assert val / t**0.25 == pytest.approx(1.81280, abs=1e-5)
    assert val == pytest.approx(_quad_1d(2, t, lambda u: 1.0), rel=1e-3)


def test_mixed_form_is_product():
    t = 1e-3
    val = ex.diagonal_expansion(ex.DiagonalForm((1, 2)), t, order=1)
    assert val == pytest.approx(math.sqrt(math.pi) * gamma(0.25) / 2 * t**0.75)


@pytest.mark.parametrize("ks", [(1,), (2,), (3,)])
def test_two_terms_with_tilted_amplitude(ks):
    t = 1e-3
    approx = ex.diagonal_expansion(ex.DiagonalForm(ks), t, lambda idx: 1.0, order=2)
    oracle = _quad_1d(ks[0], t, math.exp)
    assert approx == pytest.approx(oracle, rel=1e-3)


def test_form_validation():
    with pytest.raises(ValueError):
        ex.DiagonalForm((0, 1))
    assert ex.DiagonalForm((2, 1)).decay_exponent == Fraction(3, 4)


def test_limit_weights_keep_slowest_decay():
    w = ex.limit_weights([ex.DiagonalForm((1, 1)), ex.DiagonalForm((1, 2))], [1.0, 1.0])
    assert list(w) == [0.0, 1.0]


def test_lower_order_term():
    term = ex.lower_order_hessian_term(ex.DiagonalForm((1, 2)), [0.0, 1.0])
    assert term.variance_coefficient == pytest.approx(0.337989, abs=1e-6)
    assert term.exponent == Fraction(1, 2)
    flat = ex.lower_order_hessian_term(ex.DiagonalForm((1, 1)), [1.0, 0.0])
    assert flat.exponent == 0 and flat.variance_coefficient == pytest.approx(0.5)


@pytest.mark.parametrize("points,p,k,face_dim", [
    ([(2, 0), (0, 2)], Fraction(1), 0, 1),
    ([(2,)], Fraction(1, 2), 0, 0),
    ([(2, 2), (6, 0), (0, 6)], Fraction(1, 2), 1, 0),
    ([(2, 0), (0, 4)], Fraction(3, 4), 0, 1),
])
def test_newton_examples(points, p, k, face_dim):
    r = nw.newton_remoteness(points)
    assert (r.p, r.k_mult, r.face_dim) == (p, k, face_dim)


def test_newton_errors():
    with pytest.raises(nw.NewtonDiagramError, match="never appears"):
        nw.newton_remoteness([(2, 0), (4, 0)])
    with pytest.raises(nw.NewtonDiagramError):
        nw.newton_remoteness([(0, 0), (2, 2)])


def lp_remoteness(points):
    """min r s.t. sum lambda_i alpha_i <= r componentwise, lambda in the simplex."""
    A = np.array(points, dtype=float)
    m, n = A.shape
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_ub = np.hstack([A.T, -np.ones((n, 1))])
    A_eq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    return res.fun


exponent_sets = st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=2, max_size=6).filter(
    lambda pts: all(any(p[j] for p in pts) for j in range(2)) and all(any(p) for p in pts))


@given(exponent_sets)
def test_remoteness_matches_linear_program(pts):
    assert float(nw.remoteness(pts)) == pytest.approx(lp_remoteness(pts), abs=1e-9)


@given(exponent_sets)
def test_invariant_under_permutation(pts):
    a = nw.newton_remoteness(pts)
    b = nw.newton_remoteness([(q, p) for p, q in pts])
    assert (a.r0, a.k_mult) == (b.r0, b.k_mult)


@given(exponent_sets, st.integers(0, 3), st.integers(0, 3))
def test_invariant_under_interior_points(pts, da, db):
    a = nw.newton_remoteness(pts)
    base = pts[0]
    extra = (base[0] + da, base[1] + db)
    b = nw.newton_remoteness(pts + [extra])
    assert (a.r0, a.k_mult, a.face_dim) == (b.r0, b.k_mult, b.face_dim)


def test_nondegeneracy_examples():
    assert nw.nondegeneracy_check({(2, 0): 1.0, (0, 2): 1.0}).nondegenerate
    assert nw.nondegeneracy_check({(2, 0): 1.0, (0, 4): 1.0}).nondegenerate
    rep = nw.nondegeneracy_check({(2, 0): 1.0, (1, 1): -2.0, (0, 2): 1.0})
    assert not rep.nondegenerate
    u, v = rep.witness
    assert u == pytest.approx(v, rel=1e-4)
