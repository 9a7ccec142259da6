"""Gaussian kernels and their iterated integrals / derivatives.

All functions accept scalars or numpy arrays for the spatial argument ``y``
and a positive scalar variance ``t``.  Scalar input gives a numpy scalar.

The family ``iterated_phi(n, y, t)`` interpolates between derivatives and
repeated integrals of the heat kernel::

    n >= 1 :  int_{-inf}^{y} (y - x)^(n-1) / (n-1)! * phi_t(x) dx
    n == 0 :  phi_t(y)
    n <= -1:  d^|n| phi_t / dy^|n|

and every member satisfies ``d/dy Phi^(n) = Phi^(n-1)`` and the three-term
recurrence ``(n-1) Phi^(n) = y Phi^(n-1) + t Phi^(n-2)``.
"""

import math

import numpy as np
from scipy.special import ndtr

from .errors import CapabilityError, DomainError

MAX_ORDER = 64

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Below this standardized argument the forward recurrence for positive
# orders loses digits to cancellation; switch to backward ratios.
_BACKWARD_THRESHOLD = -1.0


def _check_t(t):
    t = float(t)
    if not math.isfinite(t) or t <= 0.0:
        raise DomainError(f"variance t must be finite and > 0, got {t!r}")
    return t


def _as_array(y):
    y = np.asarray(y, dtype=float)
    if np.isnan(y).any():
        raise DomainError("spatial argument contains NaN")
    return y


def _std_pdf(u):
    with np.errstate(over="ignore", under="ignore"):
        return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def gauss_pdf(y, t):
    """Centered Gaussian density with variance ``t``."""
    t = _check_t(t)
    y = _as_array(y)
    return (_std_pdf(y / math.sqrt(t)) / math.sqrt(t))[()]


def gauss_cdf(y, t):
    """Distribution function of N(0, t)."""
    t = _check_t(t)
    y = _as_array(y)
    return ndtr(y / math.sqrt(t))[()]


def gauss_pdf_prime(y, t):
    """First derivative of :func:`gauss_pdf` in ``y``."""
    t = _check_t(t)
    y = _as_array(y)
    out = np.zeros_like(y)
    finite = np.isfinite(y)
    yf = y[finite]
    out[finite] = -(yf / t) * _std_pdf(yf / math.sqrt(t)) / math.sqrt(t)
    return out[()]


def _negative_orders(m, u):
    """Standardized derivatives of orders 0, -1, ..., -m (list, index = |order|)."""
    f0 = _std_pdf(u)
    out = [f0]
    if m >= 1:
        out.append(-u * f0)
    # downward use of the recurrence: F_{k-2} = (k-1) F_k - u F_{k-1}
    for j in range(2, m + 1):
        k = 2 - j
        out.append((k - 1) * out[j - 2] - u * out[j - 1])
    return out


def _positive_orders(m, u):
    """Standardized iterated integrals of orders 0, 1, ..., m (list, index = order).

    ``u`` must be finite.
    """
    f0 = _std_pdf(u)
    f1 = ndtr(u)
    out = [f0, f1]
    if m <= 1:
        return out[: m + 1]

    fwd = u >= _BACKWARD_THRESHOLD
    vals = [np.array(f0, copy=True), np.array(f1, copy=True)]
    for k in range(2, m + 1):
        vals.append((u * vals[k - 1] + vals[k - 2]) / (k - 1))

    bwd = ~fwd
    if bwd.any():
        ub = u[bwd]
        # ratio r_k = F_k / F_{k-1} is the minimal solution of
        # r_k = 1 / (k r_{k+1} - u); iterate down from a deep start.
        umin = float(np.min(np.abs(ub)))
        depth = m + 40 + int(math.ceil(400.0 / (umin * umin)))
        ratios = {}
        r = np.zeros_like(ub)
        for k in range(depth, 1, -1):
            r = 1.0 / (k * r - ub)
            if k <= m:
                ratios[k] = r
        f = ndtr(ub)
        for k in range(2, m + 1):
            f = f * ratios[k]
            vals[k][bwd] = f
    return vals


def _standard_orders(lo, hi, u):
    """Standardized Phi^(n)_1(u) for n = lo..hi; returns array of shape (hi-lo+1,) + u.shape."""
    shape = np.shape(u)
    u = np.asarray(u, dtype=float).ravel()
    res = np.empty((hi - lo + 1, u.size))
    finite = np.isfinite(u)
    uf = u[finite]
    if lo <= 0:
        neg = _negative_orders(-lo, uf)
        for n in range(lo, min(hi, 0) + 1):
            res[n - lo][finite] = neg[-n]
    if hi >= 1:
        pos = _positive_orders(hi, uf)
        for n in range(max(lo, 1), hi + 1):
            res[n - lo][finite] = pos[n]
    if not finite.all():
        plus = u == np.inf
        minus = u == -np.inf
        for n in range(lo, hi + 1):
            row = res[n - lo]
            row[minus] = 0.0
            row[plus] = 0.0 if n <= 0 else (1.0 if n == 1 else np.inf)
    return res.reshape((hi - lo + 1,) + shape)


def _check_order(n, max_order):
    if int(n) != n:
        raise DomainError(f"order must be an integer, got {n!r}")
    n = int(n)
    if abs(n) > max_order:
        raise CapabilityError(f"|order| = {abs(n)} exceeds configured maximum {max_order}")
    return n


def iterated_phi_orders(lo, hi, y, t, max_order=MAX_ORDER):
    """Evaluate ``iterated_phi(n, y, t)`` for every ``n`` in ``lo..hi`` at once.

    Returns an array of shape ``(hi - lo + 1,) + np.shape(y)``.
    """
    lo = _check_order(lo, max_order)
    hi = _check_order(hi, max_order)
    if hi < lo:
        raise DomainError(f"empty order range {lo}..{hi}")
    t = _check_t(t)
    y = _as_array(y)
    s = math.sqrt(t)
    res = _standard_orders(lo, hi, y / s)
    # Phi^(n)_t(y) = t^{(n-1)/2} Phi^(n)_1(y / sqrt t)
    scale = np.array([t ** ((n - 1) / 2.0) for n in range(lo, hi + 1)])
    with np.errstate(invalid="ignore"):
        res *= scale.reshape((-1,) + (1,) * y.ndim)
    return res


def iterated_phi(n, y, t, max_order=MAX_ORDER):
    """n-th iterated integral (n >= 1) or |n|-th derivative (n <= 0) of ``phi_t``."""
    n = _check_order(n, max_order)
    return iterated_phi_orders(n, n, y, t, max_order)[0][()]
