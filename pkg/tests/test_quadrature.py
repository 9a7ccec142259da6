import math

import numpy as np
import pytest

from interlacing.errors import NumericalError
from interlacing.quadrature import (QuadratureOptions, gauss_legendre_box, quad_1d, quad_2d,
                                    truncation_radius)


def test_quad_1d_gaussian():
    val, err = quad_1d(lambda x: math.exp(-x * x / 2), -np.inf, np.inf)
    assert val == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert err < 1e-8


def test_quad_2d_triangle():
    # area of {0 <= x <= 1, x <= y <= 1}
    val, _ = quad_2d(lambda x, y: 1.0, 0, 1, lambda x: x, lambda x: 1.0)
    assert val == pytest.approx(0.5, rel=1e-12)


def test_quad_2d_empty_inner_range():
    val, _ = quad_2d(lambda x, y: 1.0, 0, 1, lambda x: 1.0, lambda x: 0.0)
    assert val == 0.0


def test_quad_1d_raises_on_divergence():
    opts = QuadratureOptions(epsabs=1e-14, epsrel=1e-14, limit=5)
    with pytest.raises(NumericalError):
        quad_1d(lambda x: math.sin(1.0 / x) / x, 1e-6, 1.0, opts)


def test_gauss_legendre_box_polynomial():
    f = lambda p: p[:, 0] ** 2 * p[:, 1] * np.exp(p[:, 2])
    val, _ = gauss_legendre_box(f, [(0, 1), (0, 2), (0, 1)])
    assert val == pytest.approx((1 / 3) * 2 * (math.e - 1), rel=1e-12)


def test_gauss_legendre_box_refinement_limit():
    f = lambda p: np.abs(p[:, 0] - 0.3141) ** 0.01
    opts = QuadratureOptions(epsabs=0.0, epsrel=1e-15)
    with pytest.raises(NumericalError):
        gauss_legendre_box(f, [(0, 1)], nodes=2, panels=1, options=opts, max_panels=8)


def test_truncation_radius_scales():
    assert truncation_radius(4.0) == pytest.approx(24.0)
