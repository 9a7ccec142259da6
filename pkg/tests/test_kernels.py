import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from interlacing import kernels as K
from interlacing.errors import CapabilityError, DomainError


def phi_oracle(n, y, t):
    """Phi^(n)_t(y) = t^{(n-1)/2} e^{-u^2/4} D_{-n}(-u) / sqrt(2 pi), u = y / sqrt t."""
    mpmath.mp.dps = 40
    u = mpmath.mpf(y) / mpmath.sqrt(t)
    val = mpmath.exp(-u * u / 4) * mpmath.pcfd(-n, -u) / mpmath.sqrt(2 * mpmath.pi)
    return float(val * mpmath.mpf(t) ** (mpmath.mpf(n - 1) / 2))


@pytest.mark.parametrize("y,t,expected", [(0, 1, 0.3989422804014327),
                                          (2, 4, 0.12098536225957168),
                                          (1, 1, 0.24197072451914337)])
def test_gauss_pdf_values(y, t, expected):
    assert K.gauss_pdf(y, t) == pytest.approx(expected, rel=1e-15)


def test_gauss_cdf_values():
    assert K.gauss_cdf(0.0, 3.7) == 0.5
    assert K.gauss_cdf(np.inf, 1.0) == 1.0
    assert K.gauss_cdf(1.0, 1.0) == pytest.approx(0.8413447460685429, rel=1e-15)


def test_gauss_pdf_prime_values():
    assert K.gauss_pdf_prime(0.0, 1.0) == 0.0
    assert K.gauss_pdf_prime(1.0, 1.0) == pytest.approx(-0.24197072451914337, rel=1e-15)
    assert K.gauss_pdf_prime(-1.0, 1.0) == pytest.approx(0.24197072451914337, rel=1e-15)


@pytest.mark.parametrize("fn", [K.gauss_pdf, K.gauss_cdf, K.gauss_pdf_prime])
@pytest.mark.parametrize("t", [0.0, -1.0, np.inf, np.nan])
def test_bad_variance(fn, t):
    with pytest.raises(DomainError):
        fn(0.0, t)


def test_nan_argument():
    with pytest.raises(DomainError):
        K.gauss_pdf(np.nan, 1.0)
    with pytest.raises(DomainError):
        K.iterated_phi(2, [0.0, np.nan], 1.0)


def test_infinite_arguments_take_limits():
    assert K.gauss_pdf(np.inf, 1.0) == 0.0
    assert K.gauss_cdf(-np.inf, 2.0) == 0.0
    vals = K.iterated_phi_orders(-2, 3, np.array([-np.inf, np.inf]), 1.0)
    assert np.all(vals[:, 0] == 0.0)
    assert list(vals[:, 1]) == [0.0, 0.0, 0.0, 1.0, np.inf, np.inf]


def test_spec_iterated_values():
    assert K.iterated_phi(1, 0.0, 1.0) == 0.5
    assert K.iterated_phi(2, 0.0, 1.0) == pytest.approx(0.3989422804014327, rel=1e-15)
    assert K.iterated_phi(-1, 0.0, 1.0) == 0.0


def test_low_orders_match_closed_forms():
    y = np.linspace(-6, 6, 41)
    np.testing.assert_allclose(K.iterated_phi(0, y, 2.0), K.gauss_pdf(y, 2.0), rtol=1e-15)
    np.testing.assert_allclose(K.iterated_phi(1, y, 2.0), K.gauss_cdf(y, 2.0), rtol=1e-15)
    np.testing.assert_allclose(K.iterated_phi(-1, y, 2.0), K.gauss_pdf_prime(y, 2.0),
                               rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("n", [-6, -3, -1, 0, 1, 2, 3, 5, 8, 12, 20])
@pytest.mark.parametrize("y", [-9.0, -4.0, -1.5, -0.3, 0.0, 0.7, 2.5, 6.0])
def test_against_parabolic_cylinder_oracle(n, y):
    t = 1.3
    ref = phi_oracle(n, y, t)
    got = float(K.iterated_phi(n, y, t))
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-300)


@given(n=st.integers(-8, 30), u=st.floats(-12, 12), t=st.floats(0.05, 20))
def test_oracle_property(n, u, t):
    y = u * math.sqrt(t)
    ref = phi_oracle(n, y, t)
    got = float(K.iterated_phi(n, y, t))
    assert got == pytest.approx(ref, rel=1e-10, abs=1e-280)


@pytest.mark.parametrize("n", range(-4, 7))
def test_derivative_ladder(n):
    h, t = 1e-4, 1.0
    y = np.linspace(-3, 3, 25)
    fd = (K.iterated_phi(n, y + h, t) - K.iterated_phi(n, y - h, t)) / (2 * h)
    np.testing.assert_allclose(fd, K.iterated_phi(n - 1, y, t), atol=1e-6)


@given(n=st.integers(2, 40), y=st.floats(-8, 8), t=st.floats(0.1, 10))
def test_three_term_recurrence(n, y, t):
    a = K.iterated_phi_orders(n - 2, n, y, t)
    lhs = (n - 1) * a[2]
    rhs = y * a[1] + t * a[0]
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-290)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_recurrence_against_defining_integral(n):
    from scipy import integrate
    y, t = 0.8, 1.7
    f = lambda x: (y - x) ** (n - 1) / math.factorial(n - 1) * K.gauss_pdf(x, t)
    ref, _ = integrate.quad(f, -np.inf, y, epsabs=0, epsrel=1e-13)
    assert K.iterated_phi(n, y, t) == pytest.approx(ref, rel=1e-8)


@given(n=st.integers(-5, 15), u=st.floats(-5, 5), t=st.floats(0.01, 100))
def test_scaling(n, u, t):
    y = u * math.sqrt(t)
    lhs = K.iterated_phi(n, y, t)
    rhs = t ** ((n - 1) / 2) * K.iterated_phi(n, u, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("n", [-2, 0, 1, 3])
def test_heat_equation(n):
    y, t = 0.4, 0.9

    def resid(h):
        dt = (K.iterated_phi(n, y, t + h) - K.iterated_phi(n, y, t - h)) / (2 * h)
        dyy = (K.iterated_phi(n, y + h, t) - 2 * K.iterated_phi(n, y, t)
               + K.iterated_phi(n, y - h, t)) / h ** 2
        return abs(dt - 0.5 * dyy)

    assert 3.5 < resid(2e-2) / resid(1e-2) < 4.5


def test_order_limits():
    with pytest.raises(CapabilityError):
        K.iterated_phi(K.MAX_ORDER + 1, 0.0, 1.0)
    with pytest.raises(CapabilityError):
        K.iterated_phi(-K.MAX_ORDER - 1, 0.0, 1.0)
    with pytest.raises(DomainError):
        K.iterated_phi(1.5, 0.0, 1.0)
    with pytest.raises(DomainError):
        K.iterated_phi_orders(3, 1, 0.0, 1.0)


def test_shapes():
    y = np.zeros((2, 3))
    assert K.iterated_phi_orders(-1, 2, y, 1.0).shape == (4, 2, 3)
    assert np.ndim(K.iterated_phi(2, 0.3, 1.0)) == 0
