"""Numerical integration helpers used by the density checks.

One- and two-dimensional integrals go through QUADPACK's adaptive
Gauss-Kronrod rule (``scipy.integrate.quad``), nested for 2-D with
variable inner limits.  Higher-dimensional integrals over boxes use a
vectorized composite Gauss-Legendre tensor rule, refined until two
successive panel counts agree.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NumericalError


@dataclass(frozen=True)
class QuadratureOptions:
    epsabs: float = 1e-10
    epsrel: float = 1e-8
    limit: int = 200
    # infinite ranges are cut at +-radius * sqrt(t); the Gaussian tail
    # beyond 12 standard deviations is below 1e-31
    radius: float = 12.0


DEFAULT_OPTIONS = QuadratureOptions()


def truncation_radius(t, options=DEFAULT_OPTIONS):
    return options.radius * math.sqrt(t)


def quad_1d(f, a, b, options=DEFAULT_OPTIONS, points=None):
    """Adaptive integral of scalar ``f`` over ``[a, b]``; returns ``(value, abserr)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=options.epsabs, epsrel=options.epsrel,
                             limit=options.limit, points=points, full_output=1)
    value, err = res[0], res[1]
    if len(res) > 3 and res[3]:
        # ier > 0; accept only if the error estimate still meets tolerance
        if not err <= max(options.epsabs, options.epsrel * abs(value)) * 10:
            raise NumericalError("1-D quadrature did not converge",
                                 value=value, abserr=err, detail=res[3])
    return value, err


def quad_2d(f, a, b, lower, upper, options=DEFAULT_OPTIONS):
    """Nested adaptive integral of ``f(x, y)`` for ``a <= x <= b``,
    ``lower(x) <= y <= upper(x)``; returns ``(value, abserr)``."""
    inner_err = [0.0]

    def inner(x):
        lo, hi = lower(x), upper(x)
        if hi <= lo:
            return 0.0
        v, e = quad_1d(lambda y: f(x, y), lo, hi, options)
        inner_err[0] = max(inner_err[0], e)
        return v

    value, err = quad_1d(inner, a, b, options)
    return value, err + inner_err[0] * (b - a)


def _gl_rule(bounds, nodes, panels):
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes, weights = [], []
    for lo, hi in bounds:
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        axes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    return axes, weights


def gauss_legendre_box(f, bounds, nodes=16, panels=4, options=DEFAULT_OPTIONS,
                       max_panels=64, chunk=200_000):
    """Tensor Gauss-Legendre integral of a vectorized ``f`` over a box.

    ``f`` receives an array of shape ``(m, d)`` and returns ``m`` values.
    The panel count doubles until successive estimates agree within the
    requested tolerance.  Returns ``(value, abserr)``.
    """
    d = len(bounds)

    def estimate(p):
        axes, weights = _gl_rule(bounds, nodes, p)
        grids = np.meshgrid(*axes, indexing="ij")
        wgrid = weights[0]
        for wk in weights[1:]:
            wgrid = np.multiply.outer(wgrid, wk)
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        wflat = wgrid.ravel()
        total = 0.0
        for start in range(0, len(pts), chunk):
            vals = np.asarray(f(pts[start:start + chunk]), dtype=float)
            total += float(np.dot(vals, wflat[start:start + chunk]))
        return total

    prev = estimate(panels)
    p = panels
    while True:
        p *= 2
        cur = estimate(p)
        err = abs(cur - prev)
        if err <= max(options.epsabs, options.epsrel * abs(cur)):
            return cur, err
        if p >= max_panels:
            raise NumericalError(f"{d}-D tensor quadrature did not converge",
                                 value=cur, abserr=err, panels=p)
        prev = cur
