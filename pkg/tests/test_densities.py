import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from interlacing import densities as D
from interlacing import kernels as K
from interlacing.errors import DomainError
from interlacing.quadrature import QuadratureOptions, gauss_legendre_box, quad_1d, quad_2d

R = 10.0
OPTS = QuadratureOptions(epsabs=1e-12, epsrel=1e-10)


def chamber_integral(f, lo=-R, hi=R, opts=OPTS):
    """Integral of f(y1, y2) over {lo <= y1 <= y2 <= hi}."""
    return quad_2d(f, lo, hi, lambda a: a, lambda a: hi, opts)[0]


def interlaced_integral(f, c=0.0, r=R):
    """Integral of vectorized f(x1, y, x2) over {x1 <= y <= x2}."""
    g = lambda p: f(p[:, 0] - p[:, 1], p[:, 0], p[:, 0] + p[:, 2])
    return gauss_legendre_box(g, [(c - r, c + r), (0, 2 * r), (0, 2 * r)], panels=4,
                              options=QuadratureOptions(epsabs=1e-10, epsrel=1e-9))[0]


# ---------------------------------------------------------------------- oracles

def det_laplace(m):
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 1:
        return m[0, 0]
    return sum((-1) ** j * m[0, j] * det_laplace(np.delete(m[1:], j, axis=1))
               for j in range(m.shape[0]))


def test_vandermonde_examples():
    assert D.vandermonde_h([0.0]) == 1.0
    assert D.vandermonde_h([0.0, 1.0]) == 1.0
    assert D.vandermonde_h([0.0, 1.0, 3.0]) == 6.0


def test_km_examples():
    assert D.km_density([0.0], [1.0], 1.0) == pytest.approx(0.24197072451914337, rel=1e-15)
    assert D.km_density([0.0, 0.0], [0.3, 1.7], 0.6) == 0.0
    oracle = K.gauss_pdf(0.0, 1.0) ** 2 - K.gauss_pdf(1.0, 1.0) ** 2
    assert oracle == pytest.approx(0.10060511156757618, rel=1e-15)
    assert D.km_density([0, 1], [0, 1], 1.0) == pytest.approx(oracle, rel=1e-14)
    assert D.km_density_plus([0, 1], [0, 1], 1.0) == pytest.approx(oracle, rel=1e-14)


def test_km_plus_reduces_and_guards():
    assert D.km_density_plus([0.2], [1.1], 0.5) == D.km_density([0.2], [1.1], 0.5)
    with pytest.raises(DomainError):
        D.km_density_plus([0.0, 0.0], [0.0, 1.0], 1.0)
    with pytest.raises(DomainError):
        D.km_density([0.0], [0.0, 1.0], 1.0)
    with pytest.raises(DomainError):
        D.km_density([1.0, 0.0], [0.0, 1.0], 1.0)


def test_km_plus_normalized():
    total = chamber_integral(lambda a, b: D.km_density_plus([0, 1], [a, b], 1.0),
                             lo=-R, hi=R + 1)
    assert total == pytest.approx(1.0, rel=1e-6)


def test_q_n0_is_heat_kernel():
    w, w2 = ([0.3], []), ([1.1], [])
    assert D.q_density(w, w2, 0.7) == pytest.approx(K.gauss_pdf(0.8, 0.7), rel=1e-15)
    assert D.q_density_dual(w, w2, 0.7) == D.q_density(w2, w, 0.7)


def test_q_vanishes_for_colliding_source():
    w = ([-1.0, 0.5, 2.0], [0.5, 0.5])
    w2 = ([-0.7, 0.2, 1.5], [0.0, 1.0])
    assert abs(D.q_density(w, w2, 1.0, raw=True)) < 1e-15


def test_q_cofactor_oracle():
    w = ([-1.0, 1.0], [0.0])
    m = D.q_matrix(w, w, 1.0)
    assert m.shape == (3, 3)
    assert D.q_density(w, w, 1.0) == pytest.approx(det_laplace(m), abs=1e-12)
    assert D.det_cofactor(m) == pytest.approx(det_laplace(m), abs=1e-15)
    assert D.det_permutation(m) == pytest.approx(det_laplace(m), abs=1e-15)


def test_q_block_structure():
    w = ([-1.0, 0.2, 1.0], [0.0, 0.5])
    w2 = ([-0.5, 0.3, 2.0], [0.1, 1.5])
    t = 0.9
    m = D.q_matrix(w, w2, t)
    (x, y), (xp, yp) = w, w2
    for i, j in itertools.product(range(3), range(3)):
        assert m[i, j] == K.gauss_pdf(xp[j] - x[i], t)
    for i, j in itertools.product(range(3), range(2)):
        assert m[i, 3 + j] == K.gauss_cdf(yp[j] - x[i], t) - (j >= i)
    for i, j in itertools.product(range(2), range(3)):
        assert m[3 + i, j] == K.gauss_pdf_prime(xp[j] - y[i], t)
    for i, j in itertools.product(range(2), range(2)):
        assert m[3 + i, 3 + j] == K.gauss_pdf(yp[j] - y[i], t)


def test_q_dual_is_swap():
    w = ([-1.0, 1.0], [0.1])
    w2 = ([-0.4, 0.8], [0.6])
    assert D.q_density_dual(w, w2, 0.5) == D.q_density(w2, w, 0.5)


def test_q_dimension_mismatch():
    with pytest.raises(DomainError):
        D.q_density(([0, 1], [0.5]), ([0, 1, 2], [0.5, 1.5]), 1.0)
    with pytest.raises(DomainError):
        D.q_density(([0, 1], [0.5, 0.7]), ([0, 1], [0.5]), 1.0)


def test_q_plus_examples():
    w = ([-1.0, 1.0], [0.0])
    w2 = ([-0.3, 0.9], [0.4])
    assert D.q_density_plus(w, w2, 1.0) == D.q_density(w, w2, 1.0)
    src = ([-1.0, 0.0, 1.0], [-0.5, 0.5])
    dst = ([-1.0, 0.2, 1.0], [0.2, 0.2])
    assert D.q_density_plus(src, dst, 1.0) == 0.0
    with pytest.raises(DomainError):
        D.q_density_plus(([-1.0, 0.5, 1.0], [0.5, 0.5]), dst, 1.0)


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_q_plus_normalized_n1(t):
    w = ([-0.5, 0.7], [0.1])

    def f(a, y, b):
        return D.q_density_plus(w, (np.stack([a, b], -1), y[:, None]), t)

    assert interlaced_integral(f, c=0.1, r=10 * math.sqrt(t)) == pytest.approx(1.0, rel=1e-6)


def test_entrance_mu_examples():
    y = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(D.entrance_mu(y[:, None], 1.7), K.gauss_pdf(y, 1.7),
                               rtol=1e-14)
    total = chamber_integral(lambda a, b: D.entrance_mu([a, b], 1.0))
    assert total == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_entrance_mu_power_law(n):
    # mu^n_t(sqrt(t) u) = t^{-n/2} mu^n_1(u): the exponent is fit on a log grid
    u = np.linspace(-1.0, 1.5, n)
    ts = np.array([0.1, 0.5, 1.0, 3.0, 10.0])
    vals = np.array([D.entrance_mu(math.sqrt(t) * u, t) for t in ts])
    slope, intercept = np.polyfit(np.log(ts), np.log(vals), 1)
    assert slope == pytest.approx(-n / 2, abs=1e-12)
    resid = np.log(vals) - (slope * np.log(ts) + intercept)
    assert np.max(np.abs(resid)) < 1e-12


def test_entrance_mu_outside_chamber():
    assert D.entrance_mu([1.0, 0.0], 1.0) == 0.0


def test_lambda_examples():
    assert D.lambda_kernel([0, 1], [0.5]) == 1.0
    for y1, y2 in [(0.2, 1.9), (0.5, 1.0), (1.0, 1.3)]:
        assert D.lambda_kernel([0, 1, 2], [y1, y2]) == pytest.approx(y2 - y1, rel=1e-14)
    assert D.lambda_kernel([0, 1, 2], [1.5, 1.7]) == 0.0
    total, _ = quad_2d(lambda a, b: D.lambda_kernel([0, 1, 2], [a, b]), 0, 1,
                       lambda a: 1.0, lambda a: 2.0, OPTS)
    assert total == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(DomainError):
        D.lambda_kernel([0, 0, 2], [0, 1])


@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5, unique=True),
       st.floats(0.1, 5))
def test_nu_factorization(vals, t):
    vals = sorted(vals)
    if min(np.diff(vals)) < 1e-3:
        return
    x, y = np.array(vals[0::2]), np.array(vals[1::2])
    nu = D.entrance_nu((x, y), t)
    ref = D.entrance_mu(x, t) * D.lambda_kernel(x, y)
    assert nu == pytest.approx(ref, rel=1e-12)


def test_nu_normalized_and_degenerate():
    f = lambda a, y, b: D.entrance_nu((np.stack([a, b], -1), y[:, None]), 1.0)
    assert interlaced_integral(f) == pytest.approx(1.0, rel=1e-6)
    assert D.entrance_nu(([0.5, 0.5], [0.5]), 1.0) == 0.0


def test_gt_density():
    y = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(
        [D.gt_entrance_density([[v]], 0.8) for v in y], K.gauss_pdf(y, 0.8), rtol=1e-14)
    assert D.gt_entrance_density([[2.0], [0.0, 1.0]], 1.0) == 0.0
    assert D.is_gt_pattern([[0.5], [0.0, 1.0]])
    assert not D.is_gt_pattern([[1.5], [0.0, 1.0]])
    total = chamber_integral(lambda a, b: quad_1d(
        lambda c: D.gt_entrance_density([[c], [a, b]], 1.0), a, b, OPTS)[0])
    assert total == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("top", [[-0.3, 1.2], [-1.0, 0.1, 0.9]])
def test_gt_top_row_marginal(top):
    t = 0.9
    top = np.array(top)
    n = len(top)
    # every pattern below `top` has the same density, so the marginal is
    # density * volume
    pattern = [np.linspace(top[0], top[-1], k + 2)[1:-1] for k in range(1, n)] + [top]
    if n == 3:
        pattern[0] = np.array([0.0])
        pattern[1] = np.array([-0.5, 0.5])
    assert D.is_gt_pattern(pattern)
    marg = D.gt_entrance_density(pattern, t) * D.gt_cone_volume(top)
    assert marg == pytest.approx(D.entrance_mu(top, t), rel=1e-13)


def test_gt_cone_volume_n3_by_quadrature():
    top = [-1.0, 0.2, 1.5]
    inner = lambda a, b: b - a
    vol, _ = quad_2d(inner, top[0], top[1], lambda a: top[1], lambda a: top[2], OPTS)
    assert vol == pytest.approx(D.gt_cone_volume(top), rel=1e-12)


def test_r_examples():
    assert D.r_density([0.2], [1.0], 0.5) == pytest.approx(K.gauss_pdf(0.8, 0.5), rel=1e-15)
    oracle = (K.iterated_phi(0, 0.0, 1.0) ** 2
              - K.iterated_phi(-1, 1.0, 1.0) * K.iterated_phi(1, -1.0, 1.0))
    assert D.r_density([0, 1], [0, 1], 1.0) == pytest.approx(oracle, rel=1e-14)


def test_r_neumann_at_diagonal():
    h, x2 = 1e-4, np.array([-0.3, 0.8])
    up = D.r_density([0.0, h], x2, 1.0, raw=True)
    down = D.r_density([0.0, -h], x2, 1.0, raw=True)
    assert abs((up - down) / (2 * h)) < 1e-7


def test_top_cdf_examples():
    x = np.linspace(-3, 3, 11)
    np.testing.assert_allclose(D.top_eigenvalue_cdf(1, x, 2.0), K.gauss_cdf(x, 2.0),
                               rtol=1e-15)
    for n in (1, 2, 5, 10):
        assert D.top_eigenvalue_cdf(n, np.inf, 1.0) == 1.0
        assert D.top_eigenvalue_cdf(n, 40.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    ref = chamber_integral(lambda a, b: D.entrance_mu([a, b], 1.0), lo=-R, hi=1.0)
    assert D.top_eigenvalue_cdf(2, 1.0, 1.0) == pytest.approx(ref, rel=1e-6)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_top_cdf_monotone(n):
    x = np.linspace(-4 * math.sqrt(n), 4 * math.sqrt(n), 400)
    v = D.top_eigenvalue_cdf(n, x, 1.0)
    assert np.all(np.diff(v) >= -1e-14)
    assert np.all((v >= 0) & (v <= 1))


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_ordered_cdf(n):
    x = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(D.ordered_eigenvalue_cdf(n, n, x, 1.3),
                               D.top_eigenvalue_cdf(n, x, 1.3), atol=1e-12)
    # smallest eigenvalue: reflection of the largest
    np.testing.assert_allclose(D.ordered_eigenvalue_cdf(n, 1, x, 1.3),
                               1 - D.top_eigenvalue_cdf(n, -x, 1.3), atol=1e-12)
    with pytest.raises(DomainError):
        D.ordered_eigenvalue_cdf(n, n + 1, 0.0, 1.0)


def test_coalescing_examples():
    assert D.coalescing_cdf([0.3], [1.0], 0.5) == pytest.approx(K.gauss_cdf(0.7, 0.5))
    for a, b in [(-0.5, 0.2), (0.3, 0.3), (1.0, 2.5)]:
        assert D.coalescing_cdf([0.1, 0.1], [a, b], 1.0) == pytest.approx(
            K.gauss_cdf(min(a, b) - 0.1, 1.0), abs=1e-15)
    for a, b in [(-1.0, 1e6 - 1.0), (0.5, 1e6 + 0.3), (2.0, 1e6 + 2.0)]:
        ref = K.gauss_cdf(a, 1.0) * K.gauss_cdf(b - 1e6, 1.0)
        assert abs(D.coalescing_cdf([0.0, 1e6], [a, b], 1.0) - ref) < 1e-9


def test_coalescing_monotone():
    z = [0.0, 0.4, 1.0]
    grid = np.linspace(-2, 3, 9)
    prev = None
    for a in grid:
        v = D.coalescing_cdf(z, [a, a + 0.5, a + 1.0], 1.0)
        assert 0.0 <= v <= 1.0
        if prev is not None:
            assert v >= prev - 1e-15
        prev = v


def test_coalescing_duality_stencil_matches_literal():
    w, w2 = ([-1.0, 1.0], [0.1]), ([-0.5, 0.9], [0.2])
    lit = D.coalescing_mixed_derivative(w, w2, 0.8, 1e-2, literal=True)
    inside = D.coalescing_mixed_derivative(w, w2, 0.8, 1e-2)
    assert inside == pytest.approx(lit, rel=1e-8)
    assert D.coalescing_duality_residual(w, w2, 0.8, 1e-3) < 1e-5
    with pytest.raises(DomainError):
        D.coalescing_mixed_derivative(([-1.0, 1.0], [0.99]), w2, 0.8, 1e-2)


def test_intertwining_n1():
    res = D.intertwining_residual([-1.0, 1.0], ([-1.0, 1.0], [0.0]), 1.0)
    assert res < 1e-8
    with pytest.raises(DomainError):
        D.intertwining_sides([0, 1, 2, 3, 4], ([0, 1, 2, 3, 4], [0.5, 1.5, 2.5, 3.5]), 1.0)
