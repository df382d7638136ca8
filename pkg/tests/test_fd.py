import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatcut.fd import central_weights, derivative, derivative_norms, stencil_points


@given(st.integers(1, 4), st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_stencil_exact_on_quartics(order, coeffs):
    h = 0.1
    k = np.arange(-2, 3) * h
    vals = np.polyval(coeffs[::-1], k)
    exact = math.factorial(order) * coeffs[order]
    assert float(derivative(vals, order, h)) == pytest.approx(exact, abs=1e-7)


def test_weights_sum_to_zero_and_validation():
    assert sum(central_weights(2, 5)) == pytest.approx(0.0, abs=1e-12)
    assert stencil_points(5) == 7 and stencil_points(6) == 7
    with pytest.raises(ValueError):
        central_weights(4, 4)


def test_derivative_norms_of_circle_curve():
    norms = derivative_norms(lambda s: np.array([np.cos(s), np.sin(s)]), 5, 1e-2, 5e-2)
    assert norms == pytest.approx(np.ones(5), rel=1e-3)
