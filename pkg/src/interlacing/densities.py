"""Closed-form finite-dimensional laws of interlaced and non-colliding
Brownian motions.

Conventions
-----------
* An ordered point of the Weyl chamber ``W^n`` is a weakly increasing
  vector.
* An interlaced point ``w = (x, y)`` has ``len(x) == len(y) + 1`` and
  ``x[0] <= y[0] <= x[1] <= ... <= y[-1] <= x[-1]``.
* A Gelfand-Tsetlin pattern is a list of rows, row ``k`` (1-based) of
  length ``k``, consecutive rows interlacing.

Densities are computed as dense determinants (LU with partial pivoting via
``numpy.linalg.det``) and accept leading batch dimensions on every point
argument.  Determinants that come out slightly negative through rounding
are clipped to zero; anything below ``-CLIP_SLACK`` times the Hadamard bound
of the matrix raises :class:`NumericalError`.  Pass ``raw=True`` to get the
signed determinant with no domain checks (finite-difference stencils need
to step outside the chamber).
"""

import itertools
import math
from collections import namedtuple

import numpy as np
from scipy.special import gammaln, ndtr

from . import kernels
from .errors import DomainError, NumericalError
from .quadrature import DEFAULT_OPTIONS, quad_1d, quad_2d

CLIP_SLACK = 1e-12

InterlacedPoint = namedtuple("InterlacedPoint", ["x", "y"])


# ---------------------------------------------------------------------------
# small utilities

def _vec(v, name="point"):
    v = np.asarray(v, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if np.isnan(v).any():
        raise DomainError(f"{name} contains NaN")
    return v


def _is_ordered(v, strict=False):
    d = np.diff(v, axis=-1)
    return np.all(d > 0, axis=-1) if strict else np.all(d >= 0, axis=-1)


def _interlaces(x, y):
    """Boolean (batched): x_1 <= y_1 <= x_2 <= ... <= y_n <= x_{n+1}."""
    if y.shape[-1] == 0:
        return np.ones(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]), dtype=bool)
    ok = (x[..., :-1] <= y) & (y <= x[..., 1:])
    return np.all(ok, axis=-1)


def _split(w, name="w"):
    x, y = w
    x = _vec(x, name + ".x")
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    if np.isnan(y).any():
        raise DomainError(f"{name}.y contains NaN")
    if x.shape[-1] != y.shape[-1] + 1:
        raise DomainError(f"{name}: len(x) must equal len(y) + 1, got "
                          f"{x.shape[-1]} and {y.shape[-1]}")
    return x, y


def _hadamard(m):
    return np.prod(np.linalg.norm(m, axis=-1), axis=-1)


def _det(m):
    n = m.shape[-1]
    if n == 0:
        return np.ones(m.shape[:-2])
    return np.linalg.det(m)


def _clip(value, matrix, what):
    value = np.asarray(value, dtype=float)
    floor = -CLIP_SLACK * np.maximum(_hadamard(matrix), 1.0)
    if np.any(value < floor):
        worst = float(np.min(value - floor))
        raise NumericalError(f"{what}: determinant significantly negative",
                             excess=worst)
    return np.maximum(value, 0.0)


def _log_vandermonde(v):
    """(sign, log|h|) of prod_{i<j} (v_j - v_i), batched over leading axes."""
    n = v.shape[-1]
    if n < 2:
        shape = v.shape[:-1]
        return np.ones(shape), np.zeros(shape)
    i, j = np.triu_indices(n, k=1)
    d = v[..., j] - v[..., i]
    with np.errstate(divide="ignore"):
        logabs = np.sum(np.log(np.abs(d)), axis=-1)
    sign = np.prod(np.sign(d), axis=-1)
    return sign, logabs


def _h_ratio(num, den, what):
    """h(num) / h(den), computed from log differences with sign tracking."""
    sd, ld = _log_vandermonde(den)
    if np.any(sd == 0):
        raise DomainError(f"{what}: h vanishes at the starting point "
                          "(repeated coordinates)")
    sn, ln = _log_vandermonde(num)
    with np.errstate(invalid="ignore"):
        out = sn * sd * np.exp(ln - ld)
    return np.where(sn == 0, 0.0, out)


def _log_factorial(k):
    return float(gammaln(k + 1.0))


def _log_z(n):
    """log of Z_n = (2 pi)^{n/2} prod_{j<n} j!."""
    return 0.5 * n * math.log(2.0 * math.pi) + sum(_log_factorial(j) for j in range(1, n))


def _scalar(v):
    v = np.asarray(v)
    return v[()] if v.ndim == 0 else v


def det_cofactor(m):
    """Determinant by Laplace expansion along the first row.

    Independent of LU; intended as a cross-check for small matrices
    (cost grows factorially).
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DomainError("det_cofactor expects a square matrix")
    if n == 0:
        return 1.0
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(m[1:], j, axis=1)
        total += (-1.0) ** j * m[0, j] * det_cofactor(minor)
    return total


def det_permutation(m):
    """Determinant from the Leibniz permutation sum (tiny matrices only)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        total += (-1.0) ** inv * np.prod(m[np.arange(n), perm])
    return total


# ---------------------------------------------------------------------------
# Vandermonde and Karlin-McGregor

def vandermonde_h(y):
    """``prod_{i<j} (y_j - y_i)``; nonnegative on the Weyl chamber."""
    y = _vec(y, "y")
    n = y.shape[-1]
    if n < 2:
        return _scalar(np.ones(y.shape[:-1]))
    i, j = np.triu_indices(n, k=1)
    return _scalar(np.prod(y[..., j] - y[..., i], axis=-1))


def km_matrix(y, y2, t):
    y = _vec(y, "y")
    y2 = _vec(y2, "y2")
    if y.shape[-1] != y2.shape[-1]:
        raise DomainError(f"length mismatch: {y.shape[-1]} vs {y2.shape[-1]}")
    return kernels.gauss_pdf(y2[..., None, :] - y[..., :, None], t)


def km_density(y, y2, t, raw=False):
    """Karlin-McGregor density ``det{phi_t(y2_j - y_i)}`` of Brownian motion
    in ``W^n`` killed on leaving the chamber."""
    m = km_matrix(y, y2, t)
    val = _det(m)
    if raw:
        return _scalar(val)
    y, y2 = _vec(y), _vec(y2)
    if not (np.all(_is_ordered(y)) and np.all(_is_ordered(y2))):
        raise DomainError("km_density: points must be ordered (use raw=True otherwise)")
    return _scalar(_clip(val, m, "km_density"))


def km_density_plus(y, y2, t):
    """Transition density of Dyson's non-colliding Brownian motion:
    ``h(y2) / h(y) * km_density(y, y2, t)``."""
    y, y2 = _vec(y, "y"), _vec(y2, "y2")
    if not np.all(_is_ordered(y, strict=True)):
        raise DomainError("km_density_plus: starting point must be strictly increasing")
    return _scalar(_h_ratio(y2, y, "km_density_plus") * km_density(y, y2, t))


# ---------------------------------------------------------------------------
# interlaced pair (X, Y)

def q_matrix(w, w2, t):
    """The (2n+1) x (2n+1) block matrix whose determinant is ``q^n_t(w, w2)``."""
    x, y = _split(w, "w")
    xp, yp = _split(w2, "w2")
    if x.shape[-1] != xp.shape[-1]:
        raise DomainError(f"dimension mismatch: n={y.shape[-1]} vs n={yp.shape[-1]}")
    n = y.shape[-1]
    a = kernels.gauss_pdf(xp[..., None, :] - x[..., :, None], t)
    ind = (np.arange(n)[None, :] >= np.arange(n + 1)[:, None]).astype(float)
    b = kernels.gauss_cdf(yp[..., None, :] - x[..., :, None], t) - ind
    c = kernels.gauss_pdf_prime(xp[..., None, :] - y[..., :, None], t)
    d = kernels.gauss_pdf(yp[..., None, :] - y[..., :, None], t)
    shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2], c.shape[:-2], d.shape[:-2])
    top = np.concatenate([np.broadcast_to(a, shape + a.shape[-2:]),
                          np.broadcast_to(b, shape + b.shape[-2:])], axis=-1)
    bottom = np.concatenate([np.broadcast_to(c, shape + c.shape[-2:]),
                             np.broadcast_to(d, shape + d.shape[-2:])], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def q_density(w, w2, t, raw=False):
    """Transition density of the interlaced pair killed when two Y's collide."""
    m = q_matrix(w, w2, t)
    val = _det(m)
    if raw:
        return _scalar(val)
    for name, pt in (("w", w), ("w2", w2)):
        x, y = _split(pt, name)
        if not np.all(_interlaces(x, y)):
            raise DomainError(f"q_density: {name} is not an interlaced point")
    return _scalar(_clip(val, m, "q_density"))


def q_density_dual(w, w2, t, raw=False):
    """Dual family: ``q_density(w2, w, t)``."""
    return q_density(w2, w, t, raw=raw)


def q_density_plus(w, w2, t):
    """``h(y2) / h(y) * q_density(w, w2, t)``: Y conditioned never to collide."""
    _, y = _split(w, "w")
    _, yp = _split(w2, "w2")
    if not np.all(_is_ordered(y, strict=True)):
        raise DomainError("q_density_plus: y must be strictly increasing")
    return _scalar(_h_ratio(yp, y, "q_density_plus") * q_density(w, w2, t))


# ---------------------------------------------------------------------------
# entrance laws and the intertwining kernel

def entrance_mu(y, t):
    """GUE-type eigenvalue density at time ``t`` (process started at the origin)."""
    t = kernels._check_t(t)
    y = _vec(y, "y")
    n = y.shape[-1]
    sign, logh = _log_vandermonde(y)
    with np.errstate(invalid="ignore"):
        logval = (-_log_z(n) - 0.5 * n * n * math.log(t)
                  - np.sum(y * y, axis=-1) / (2.0 * t) + 2.0 * logh)
        val = np.exp(logval)
    val = np.where((sign == 0) | ~_is_ordered(y), 0.0, val)
    return _scalar(val)


def lambda_kernel(x, y):
    """``n! h_n(y) / h_{n+1}(x)`` on the interlacing box ``W^n(x)``, else 0."""
    x = _vec(x, "x")
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        y = y.reshape(1)
    if x.shape[-1] != y.shape[-1] + 1:
        raise DomainError("lambda_kernel: len(x) must equal len(y) + 1")
    if not np.all(_is_ordered(x, strict=True)):
        raise DomainError("lambda_kernel: x must be strictly increasing")
    n = y.shape[-1]
    sy, ly = _log_vandermonde(y)
    _, lx = _log_vandermonde(x)
    with np.errstate(invalid="ignore"):
        val = np.exp(_log_factorial(n) + ly - lx)
    inside = _interlaces(x, y)
    return _scalar(np.where(inside & (sy != 0), val, 0.0))


def entrance_nu(w, t):
    """Entrance law of the h-transformed interlaced pair started at the origin."""
    t = kernels._check_t(t)
    x, y = _split(w, "w")
    n = y.shape[-1]
    sx, lx = _log_vandermonde(x)
    sy, ly = _log_vandermonde(y)
    with np.errstate(invalid="ignore"):
        logval = (_log_factorial(n) - _log_z(n + 1) - 0.5 * (n + 1) ** 2 * math.log(t)
                  - np.sum(x * x, axis=-1) / (2.0 * t) + lx + ly)
        val = np.exp(logval)
    ok = _interlaces(x, y) & (sx != 0) & (sy != 0)
    return _scalar(np.where(ok, val, 0.0))


def is_gt_pattern(rows):
    rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]
    for k, r in enumerate(rows, start=1):
        if r.shape[-1] != k:
            return False
    return all(np.all(_interlaces(rows[k], rows[k - 1])) for k in range(1, len(rows)))


def gt_entrance_density(pattern, t):
    """Density of the Gelfand-Tsetlin cone process at time ``t`` from the origin.

    Depends on the pattern only through its top row, times the indicator
    that the rows interlace.
    """
    t = kernels._check_t(t)
    rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in pattern]
    n = len(rows)
    if n == 0:
        raise DomainError("empty pattern")
    for k, r in enumerate(rows, start=1):
        if r.shape[-1] != k:
            raise DomainError(f"row {k} has length {r.shape[-1]}")
    top = rows[-1]
    sign, logh = _log_vandermonde(top)
    with np.errstate(invalid="ignore"):
        logval = (-0.5 * n * math.log(2.0 * math.pi) - 0.5 * n * n * math.log(t)
                  - np.sum(top * top, axis=-1) / (2.0 * t) + logh)
        val = np.exp(logval)
    ok = (sign > 0) | (n == 1)
    for k in range(1, n):
        ok = ok & _interlaces(rows[k], rows[k - 1])
    return _scalar(np.where(ok, val, 0.0))


def gt_cone_volume(top):
    """Volume of the set of patterns below the row ``top``: ``h_k(top) / prod_{j<k} j!``."""
    top = _vec(top, "top")
    k = top.shape[-1]
    return _scalar(vandermonde_h(top) / math.exp(sum(_log_factorial(j) for j in range(1, k))))


# ---------------------------------------------------------------------------
# corner process and largest eigenvalue

def r_matrix(x, x2, t):
    x, x2 = _vec(x, "x"), _vec(x2, "x2")
    if x.shape[-1] != x2.shape[-1]:
        raise DomainError(f"length mismatch: {x.shape[-1]} vs {x2.shape[-1]}")
    n = x.shape[-1]
    diff = x2[..., None, :] - x[..., :, None]
    table = kernels.iterated_phi_orders(-(n - 1), n - 1, diff, t)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    order = (i - j) + (n - 1)
    table = np.moveaxis(table, 0, -1)  # (..., n, n, orders)
    return np.take_along_axis(table, np.broadcast_to(order[..., None],
                              table.shape[:-1] + (1,)), axis=-1)[..., 0]


def r_density(x, x2, t, raw=False):
    """``det{Phi_t^(i-j)(x2_j - x_i)}``: transition density of the corner
    process ``(X^1_1, ..., X^n_n)`` of the Gelfand-Tsetlin cone."""
    m = r_matrix(x, x2, t)
    val = _det(m)
    if raw:
        return _scalar(val)
    if not (np.all(_is_ordered(_vec(x))) and np.all(_is_ordered(_vec(x2)))):
        raise DomainError("r_density: points must be ordered (use raw=True otherwise)")
    return _scalar(_clip(val, m, "r_density"))


def top_eigenvalue_cdf(n, x, t):
    """``P(largest of n GUE-type eigenvalues at time t <= x)`` as
    ``det{Phi_t^(i-j+1)(x)}``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise DomainError("x contains NaN")
    flat = x.ravel()
    out = np.empty(flat.shape)
    out[flat == np.inf] = 1.0
    out[flat == -np.inf] = 0.0
    fin = np.isfinite(flat)
    if fin.any():
        xf = flat[fin]
        table = kernels.iterated_phi_orders(-(n - 2), n, xf, t)
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        order = (i - j + 1) + (n - 2)
        m = np.moveaxis(table[order], -1, 0)  # (m, n, n)
        val = _det(m)
        slack = CLIP_SLACK * np.maximum(_hadamard(m), 1.0)
        if np.any(val < -slack) or np.any(val > 1.0 + slack):
            raise NumericalError("top_eigenvalue_cdf outside [0, 1] beyond rounding slack")
        out[fin] = np.clip(val, 0.0, 1.0)
    return _scalar(out.reshape(x.shape))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _hermite_gram(alpha, n, panels=12, lower=-40.0):
    """``M_jk = int_{-inf}^{alpha} He_j He_k phi / sqrt(j! k!)`` for each alpha (m,)."""
    lo = np.full_like(alpha, lower)
    hi = np.maximum(alpha, lower)
    edges = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, :]
    half = 0.5 * np.diff(edges, axis=1)
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    u = (mid[:, :, None] + half[:, :, None] * _GL_NODES).reshape(len(alpha), -1)
    w = (half[:, :, None] * _GL_WEIGHTS).reshape(len(alpha), -1) * kernels.gauss_pdf(u, 1.0)
    he = [np.ones_like(u), u]
    for k in range(1, n - 1):
        he.append(u * he[k] - k * he[k - 1])
    he = np.stack(he[:n], axis=1) / np.sqrt([math.factorial(k) for k in range(n)])[None, :, None]
    return np.einsum("mjq,mkq,mq->mjk", he, he, w)


def ordered_eigenvalue_cdf(n, k, x, t, chunk=4096):
    """``P(k-th smallest of n GUE-type eigenvalues at time t <= x)`` (k 1-based).

    The number of eigenvalues in ``(-inf, x]`` is a sum of independent
    Bernoulli variables whose means are the eigenvalues of the Gram matrix
    of the first ``n`` Hermite functions on ``(-inf, x]``.
    """
    n, k = int(n), int(k)
    if n < 1 or not 1 <= k <= n:
        raise DomainError("need n >= 1 and 1 <= k <= n")
    kernels._check_t(t)
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise DomainError("x contains NaN")
    flat = x.ravel()
    out = np.empty(flat.shape)
    for s in range(0, flat.size, chunk):
        alpha = np.clip(flat[s:s + chunk] / math.sqrt(t), -50.0, 50.0)
        lam = np.clip(np.linalg.eigvalsh(_hermite_gram(alpha, n)), 0.0, 1.0)
        # Poisson-binomial law of the count
        dist = np.zeros((len(alpha), n + 1))
        dist[:, 0] = 1.0
        for j in range(n):
            p = lam[:, j:j + 1]
            dist[:, 1:] = dist[:, 1:] * (1.0 - p) + dist[:, :-1] * p
            dist[:, 0] *= 1.0 - p[:, 0]
        out[s:s + chunk] = np.clip(dist[:, k:].sum(axis=1), 0.0, 1.0)
    return _scalar(out.reshape(x.shape))


# ---------------------------------------------------------------------------
# coalescing Brownian motions

def coalescing_matrix(z, z2, t):
    z, z2 = _vec(z, "z"), _vec(z2, "z2")
    if z.shape[-1] != z2.shape[-1]:
        raise DomainError(f"length mismatch: {z.shape[-1]} vs {z2.shape[-1]}")
    n = z.shape[-1]
    upper = (np.arange(n)[:, None] < np.arange(n)[None, :]).astype(float)
    return kernels.gauss_cdf(z2[..., None, :] - z[..., :, None], t) - upper


def coalescing_cdf(z, z2, t, raw=False):
    """``P(Z_t(z_i) <= z2_i for all i)`` for coalescing Brownian motions
    started from the ordered point ``z``."""
    m = coalescing_matrix(z, z2, t)
    val = _det(m)
    if raw:
        return _scalar(val)
    slack = CLIP_SLACK * np.maximum(_hadamard(m), 1.0)
    if np.any(val < -slack) or np.any(val > 1.0 + slack):
        raise NumericalError("coalescing_cdf outside [0, 1] beyond rounding slack")
    return _scalar(np.clip(val, 0.0, 1.0))


# ---------------------------------------------------------------------------
# identity residuals

def intertwining_sides(x, w2, t, options=DEFAULT_OPTIONS):
    """Both sides of the intertwining identity between the interlaced pair
    and the Dyson process with one more particle.

    Returns ``(lhs, rhs, abserr)`` where ``lhs`` integrates
    ``lambda(x, y) q^+((x, y), w2)`` over ``y`` in ``W^n(x)`` and
    ``rhs = p^+(x, x2) lambda(x2, y2)``.
    """
    x = _vec(x, "x")
    xp, yp = _split(w2, "w2")
    n = x.shape[-1] - 1
    if xp.shape[-1] != n + 1:
        raise DomainError("intertwining: dimension mismatch")
    if n > 2:
        raise DomainError("intertwining quadrature supports n <= 2")
    if not _is_ordered(x, strict=True):
        raise DomainError("intertwining: x must be strictly increasing")
    rhs = float(km_density_plus(x, xp, t) * lambda_kernel(xp, yp))

    def integrand(*ys):
        y = np.array(ys)
        return float(lambda_kernel(x, y) * q_density_plus((x, y), (xp, yp), t))

    if n == 0:
        return float(q_density_plus((x, np.empty(0)), (xp, yp), t)), rhs, 0.0
    if n == 1:
        lhs, err = quad_1d(integrand, x[0], x[1], options)
    else:
        lhs, err = quad_2d(integrand, x[0], x[1], lambda _: x[1], lambda _: x[2], options)
    return lhs, rhs, err


def intertwining_residual(x, w2, t, options=DEFAULT_OPTIONS, eps=1e-300):
    """``|LHS - RHS| / max(|RHS|, eps)`` for the intertwining identity."""
    lhs, rhs, _ = intertwining_sides(x, w2, t, options)
    return abs(lhs - rhs) / max(abs(rhs), eps)


def coalescing_mixed_derivative(w, w2, t, h, literal=False):
    """Central-difference estimate of ``-d_y d_{x2_1} d_{x2_2}`` of the
    coalescing CDF with starts ``(x_1, y_1, x_2)`` and levels
    ``(x2_1, y2_1, x2_2)`` (n = 1 only).

    The 8-point stencil is applied inside the determinant: ``y_1`` enters
    one row and ``x2_1``, ``x2_2`` one column each, so by multilinearity the
    stencil sum equals the determinant of the differenced matrix.  This is
    the same number in exact arithmetic but loses ~h^2 fewer digits to
    cancellation.  ``literal=True`` sums the eight full determinants.
    """
    x, y = _split(w, "w")
    xp, yp = _split(w2, "w2")
    if y.shape[-1] != 1 or yp.shape[-1] != 1:
        raise DomainError("mixed-derivative duality is implemented for n = 1 only")
    z = np.array([x[0], y[0], x[1]])
    zp = np.array([xp[0], yp[0], xp[1]])
    for name, v in (("w", z), ("w2", zp)):
        if np.min(np.diff(v)) < 4.0 * h:
            raise DomainError(f"coalescing duality: spacing of {name} below 4h "
                              "(stencil would overlap)")
    if literal:
        total = 0.0
        for sa, sb, sc in itertools.product((1.0, -1.0), repeat=3):
            zz = z + np.array([0.0, sa * h, 0.0])
            zzp = zp + np.array([sb * h, 0.0, sc * h])
            total += sa * sb * sc * coalescing_cdf(zz, zzp, t, raw=True)
        return -total / (8.0 * h ** 3)

    s = math.sqrt(kernels._check_t(t))

    def cdf(a):
        return ndtr(np.asarray(a) / s)

    m = coalescing_matrix(z, zp, t)
    for i in (0, 2):
        for j in (0, 2):
            m[i, j] = cdf(zp[j] + h - z[i]) - cdf(zp[j] - h - z[i])
    m[1, 1] = cdf(zp[1] - z[1] - h) - cdf(zp[1] - z[1] + h)
    for j in (0, 2):
        a = zp[j] - z[1]
        # sum over sa, sb of sa*sb*Phi(a + sb h - sa h)
        m[1, j] = (cdf(a) - cdf(a - 2 * h)) - (cdf(a + 2 * h) - cdf(a))
    return -float(_det(m)) / (8.0 * h ** 3)


def coalescing_duality_residual(w, w2, t, h):
    """``|finite-difference mixed derivative of the coalescing CDF - q(w, w2)|``."""
    fd = coalescing_mixed_derivative(w, w2, t, h)
    return abs(fd - float(q_density(w, w2, t, raw=True)))
