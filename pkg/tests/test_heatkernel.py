import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatcut import heatkernel as hk
from heatcut import manifold as mf
from heatcut.acceptance import chapman_kolmogorov, kernel_total_mass
from heatcut.manifold import Circle, FlatTorus, Sphere

from conftest import TWO_PI, sph

# log p_t(N, point at angle theta) on the unit S^2 and S^3, from the spectral
# series summed in 250-digit arithmetic (mpmath)
S2_LOG_ORACLE = [
    (0.05, 0.3, 0.27373088917684653),
    (0.05, 2.0, -38.438767964038763),
    (0.5, 1.0, -1.9726357462523418),
    (0.02, math.pi, -240.64378416644701),
    (0.01, 3.0, -445.69998261705356),
    (1.5, 0.0, -1.9853323267301064),
]
S3_LOG_ORACLE = [
    (0.05, 0.7, -3.0551735468878627),
    (0.03, math.pi - 1e-9, -155.4892648534621),
    (0.8, 2.5, -4.5085384354400889),
]


@pytest.mark.parametrize("t,theta,ref", S2_LOG_ORACLE)
def test_s2_against_high_precision_series(t, theta, ref):
    M = Sphere(2, 1.0)
    val = float(hk.log_kernel(M, t, sph(0.0), sph(theta)))
    assert val == pytest.approx(ref, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("t,theta,ref", S3_LOG_ORACLE)
def test_s3_against_high_precision_series(t, theta, ref):
    M = Sphere(3, 1.0)
    e4 = np.array([0.0, 0.0, 0.0, 1.0])
    y = np.array([math.sin(theta), 0.0, 0.0, math.cos(theta)])
    assert float(hk.log_kernel(M, t, e4, y)) == pytest.approx(ref, rel=1e-13, abs=1e-13)


def test_circle_example_value():
    ev = hk.heat_kernel(Circle(1.0), 0.5, np.array([0.0]), np.array([0.0]))
    assert ev.value == pytest.approx(0.564190, abs=5e-7)
    assert ev.truncation_error_bound <= 1e-14 * ev.value


@given(st.floats(0.01, 3.0), st.floats(0.0, math.pi), st.floats(0.5, 3.0))
def test_circle_images_match_fourier_series(t, d, R):
    M = Circle(R)
    images = math.exp(float(hk.log_kernel(M, t, np.array([0.0]), np.array([d]))))
    fourier = float(hk.circle_kernel_fourier(R, t, d))
    # the Fourier sum cancels down to roundoff of its largest term
    peak = 1.0 / math.sqrt(TWO_PI * t)
    assert images == pytest.approx(fourier, rel=1e-9, abs=1e-13 * peak)


def test_torus_factorises_into_circles():
    M = FlatTorus((2.0, 5.0))
    x, y = np.array([0.1, 0.2]), np.array([1.7, 4.1])
    t = 0.3
    a = hk.log_kernel(Circle(2.0 / TWO_PI), t, x[:1], y[:1])
    b = hk.log_kernel(Circle(5.0 / TWO_PI), t, x[1:], y[1:])
    assert float(hk.log_kernel(M, t, x, y)) == pytest.approx(float(a + b), rel=1e-12)


def test_cross_check_and_bound():
    ev = hk.heat_kernel(Sphere(2, 1.0), 0.05, sph(0.0), sph(0.3), cross_check=True)
    assert ev.value > 0
    assert ev.truncation_error_bound <= 1e-14 * ev.value


def test_bad_time_raises():
    with pytest.raises(hk.KernelError):
        hk.heat_kernel(Circle(1.0), -1.0, np.array([0.0]), np.array([0.0]))


models = st.sampled_from([Circle(1.0), Circle(2.5), FlatTorus((TWO_PI, TWO_PI)), FlatTorus((3.0, 5.0)),
                          Sphere(2, 1.0), Sphere(2, 2.0), Sphere(3, 1.0)])


@given(models, st.floats(0.05, 1.5), st.integers(0, 2**16))
def test_normalisation(M, t, seed):
    from heatcut.acceptance import _random_point
    x = _random_point(M, np.random.default_rng(seed))
    assert kernel_total_mass(M, t, x) == pytest.approx(1.0, abs=1e-8)


@given(st.sampled_from([Circle(1.0), FlatTorus((TWO_PI, TWO_PI)), Sphere(2, 1.0)]),
       st.floats(0.1, 0.6), st.floats(0.1, 0.6), st.integers(0, 2**16))
def test_chapman_kolmogorov(M, s, t, seed):
    from heatcut.acceptance import _random_point
    rng = np.random.default_rng(seed)
    lhs, rhs = chapman_kolmogorov(M, s, t, _random_point(M, rng), _random_point(M, rng))
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_energy_t_converges_to_energy():
    M = Sphere(2, 1.0)
    x, y = sph(0.0), sph(2.0)
    gaps = [abs(hk.varadhan_gap(M, t, x, y)) for t in (0.1, 0.01, 0.001)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.01


def test_flat_gradient_and_hessian_are_exact():
    M = FlatTorus((20.0, 20.0))
    x, y, A = np.zeros(2), np.array([0.6, 0.8]), np.array([0.6, 0.8])
    assert hk.grad_energy_t(M, 0.05, x, y, A) == pytest.approx(1.0, rel=1e-8)
    assert hk.hess_energy_t(M, 0.05, x, y, A) == pytest.approx(1.0, rel=1e-6)


def test_pleijel_k_and_l_on_flat_torus():
    M = FlatTorus((20.0, 20.0))
    x, y = np.zeros(2), np.array([0.6, 0.8])
    assert float(hk.pleijel_k(M, 0.05, x, y)) == pytest.approx(1.0, rel=1e-10)
    # t grad log p_t(x, .) = -(y - x) for the plane
    assert hk.log_grad_l(M, 0.05, x, y, np.array([1.0, 0.0])) == pytest.approx(-0.6, rel=1e-7)


def test_antipodal_sphere_constant():
    from heatcut.cutanalysis import scaled_antipodal_hessian
    val = scaled_antipodal_hessian(Sphere(3, 1.0), np.array([0.0, 0.0, 0.0, 1.0]))
    assert val == pytest.approx(-math.pi**2 / 3, rel=0.02)
