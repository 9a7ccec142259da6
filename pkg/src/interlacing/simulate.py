"""Pathwise Monte Carlo for reflected interlaced systems, Dyson Brownian
motion, the Gelfand-Tsetlin cone process and coalescing Brownian motions.

All simulators share one execution model.  Paths are split into blocks of
``SimConfig.block_size``; block ``b`` draws from a counter-based Philox
stream keyed by ``(seed, b)`` and is advanced as a vectorized numpy batch.
Blocks may run on a thread pool, and results are concatenated in block
order, so output is bit-identical for any worker count.

Reflection uses the Euler projection of :func:`skorokhod_step`.  With
``bridge_correction`` on, pushes are instead computed from the exact
minimum of the Brownian bridge of the gap to each barrier over the step,
which removes the O(sqrt(dt)) under-reflection of the projection scheme
near a single barrier.  The same flag enables bridge crossing probabilities
for collision (killed pair) and coalescence detection.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from .densities import vandermonde_h
from .errors import DomainError, NumericalError

THREADS_ENV = "INTERLACING_THREADS"
SUBSTEP_DEPTH = 40
DYSON_KAPPA = 0.02


@dataclass(frozen=True)
class SpreadStart:
    """Deterministic strictly interlaced start at time 0 with spacing ``eps``."""
    eps: float = 1e-3


@dataclass(frozen=True)
class EntranceStart:
    """Exact sample of the entrance law at time ``t0``, evolved from there."""
    t0: float


StartMode = Union[SpreadStart, EntranceStart]


@dataclass(frozen=True)
class SimConfig:
    horizon_t: float
    dt: float
    n_paths: int
    seed: int = 0
    bridge_correction: bool = True
    start: Optional[StartMode] = None
    block_size: int = 16384
    record_every: Optional[int] = None
    check_invariants: bool = False

    def __post_init__(self):
        if not (self.horizon_t > 0 and math.isfinite(self.horizon_t)):
            raise DomainError("horizon_t must be a positive finite number")
        if not (0 < self.dt < self.horizon_t):
            raise DomainError("need 0 < dt < horizon_t")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise DomainError("n_paths must be a positive integer")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.block_size < 1:
            raise DomainError("block_size must be >= 1")
        if isinstance(self.start, EntranceStart) and not (0 < self.start.t0 < self.horizon_t):
            raise DomainError("EntranceStart needs 0 < t0 < horizon_t")
        if isinstance(self.start, SpreadStart) and not self.start.eps > 0:
            raise DomainError("SpreadStart needs eps > 0")
        if self.record_every is not None and self.record_every < 1:
            raise DomainError("record_every must be >= 1")

    def to_dict(self):
        d = asdict(self)
        if self.start is not None:
            d["start"] = {"mode": type(self.start).__name__, **asdict(self.start)}
        return d


@dataclass
class PathBatch:
    """Terminal samples (one row per path) plus optional recorded paths."""
    terminal: np.ndarray
    columns: list
    seed: int
    config: dict
    times: Optional[np.ndarray] = None
    paths: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    def column(self, name):
        return self.terminal[:, self.columns.index(name)]


def resolve_workers(workers=None):
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1"))
    return max(1, int(workers))


def block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def _run_blocks(cfg, block_fn, workers=None):
    sizes = [min(cfg.block_size, cfg.n_paths - s) for s in range(0, cfg.n_paths, cfg.block_size)]

    def job(b):
        return block_fn(block_rng(cfg.seed, b), sizes[b])

    workers = resolve_workers(workers)
    if workers == 1 or len(sizes) == 1:
        results = [job(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(len(sizes))))
    merged = {}
    for key in results[0]:
        merged[key] = np.concatenate([r[key] for r in results], axis=0)
    return merged


def _time_grid(t_start, horizon, dt):
    steps = max(1, int(round((horizon - t_start) / dt)))
    return steps, (horizon - t_start) / steps


def _batch(cfg, terminal, columns, t_start, steps, extras=None, paths=None, start=None):
    times = None
    if cfg.record_every is not None:
        dt_eff = (cfg.horizon_t - t_start) / steps
        idx = np.arange(0, steps + 1, cfg.record_every)
        times = t_start + idx * dt_eff
    config = cfg.to_dict()
    if start is not None:
        config["start"] = {"mode": type(start).__name__, **asdict(start)}
    config["t_start"] = t_start
    config["steps"] = steps
    return PathBatch(terminal=terminal, columns=columns, seed=cfg.seed, config=config,
                     times=times, paths=paths, extras=extras or {})


# ---------------------------------------------------------------------------
# reflection primitives

def skorokhod_step(value, increment, lower=None, upper=None):
    """Apply a free increment, then project back into ``[lower, upper]``.

    Returns ``(new_value, dL_minus, dL_plus)``: the distance pushed up off
    ``lower`` and pushed down off ``upper``.  Barriers may be ``None``.
    Scalars or arrays (broadcast) are accepted.
    """
    v = np.asarray(value, dtype=float) + np.asarray(increment, dtype=float)
    lo = np.full_like(v, -np.inf) if lower is None else np.broadcast_to(np.asarray(lower, dtype=float), v.shape)
    hi = np.full_like(v, np.inf) if upper is None else np.broadcast_to(np.asarray(upper, dtype=float), v.shape)
    if np.any(lo > hi):
        raise DomainError("skorokhod_step: lower barrier above upper barrier")
    start = v
    # alternating one-sided maps; for endpoint data this settles after one
    # sweep, the loop guards the fixed-point tolerance
    for _ in range(64):
        nv = np.minimum(np.maximum(v, lo), hi)
        if np.all(np.abs(nv - v) <= 1e-14):
            v = nv
            break
        v = nv
    net = v - start
    dlm = np.maximum(net, 0.0)
    dlp = np.maximum(-net, 0.0)
    if np.ndim(v) == 0:
        return float(v), float(dlm), float(dlp)
    return v, dlm, dlp


def _bridge_min(g0, g1, var_dt, e):
    """Minimum over a step of a Brownian bridge from ``g0`` to ``g1`` whose
    increment has variance ``var_dt``; ``e`` is Exp(1)."""
    c = g1 - g0
    return 0.5 * (g0 + g1 - np.sqrt(c * c + 2.0 * var_dt * e))


def _reflect_row(x, below0, below1, dgam, bridge, dt, rng):
    """Advance row ``x`` (B, k) by ``dgam`` keeping ``x_i`` in
    ``[below_{i-1}, below_i]``; ``below0/below1`` is the (B, k-1) barrier
    row at the start/end of the step.

    With ``bridge`` the push off each barrier is the exact bridge minimum
    of the gap (variance 2 dt), which is exact in law for a coordinate
    with a single barrier.  A coordinate pushed by both barriers is then
    clipped, i.e. the fixed point of the alternating one-sided maps.
    Returns ``(x_new, dL_minus, dL_plus)``.
    """
    free = x + dgam
    new = free.copy()
    if bridge:
        e = rng.standard_exponential((2,) + below0.shape)
        m = _bridge_min(below0 - x[:, :-1], below1 - free[:, :-1], 2.0 * dt, e[0])
        new[:, :-1] += np.minimum(m, 0.0)
        m = _bridge_min(x[:, 1:] - below0, free[:, 1:] - below1, 2.0 * dt, e[1])
        new[:, 1:] -= np.minimum(m, 0.0)
    np.minimum(new[:, :-1], below1, out=new[:, :-1])
    np.maximum(new[:, 1:], below1, out=new[:, 1:])
    net = new - free
    return new, np.maximum(net, 0.0), np.maximum(-net, 0.0)


# ---------------------------------------------------------------------------
# Dyson Brownian motion

def _dyson_drift(y):
    d = y[..., :, None] - y[..., None, :]
    n = y.shape[-1]
    with np.errstate(divide="ignore"):
        inv = 1.0 / d
    inv[..., np.arange(n), np.arange(n)] = 0.0
    return inv.sum(axis=-1)


def _strict(y):
    return np.all(np.diff(y, axis=-1) > 0, axis=-1)


def _min_gap(y):
    return np.diff(y, axis=-1).min(axis=-1)


def _dyson_advance(y, dw, h, rng):
    """Advance rows of ``y`` (B, n) over time ``h``; ``dw`` is the Brownian
    increment for rows that take a single step.

    A row takes one Euler step when ``h <= DYSON_KAPPA * gap**2`` (the drift
    moves it a small fraction of its smallest gap) and its smallest gap does
    not halve.  Other rows run their own clock with substeps
    ``min(remaining, DYSON_KAPPA * gap**2, cap)`` and fresh increments; a
    rejected substep quarters that row's cap and an accepted one doubles
    it.  Below ``h * 2**-SUBSTEP_DEPTH`` only the ordering is enforced.
    """
    if y.shape[-1] < 2:
        return y + dw
    gap = _min_gap(y)
    out = y + _dyson_drift(y) * h + dw
    ok = (h <= DYSON_KAPPA * gap ** 2) & (_min_gap(out) >= 0.5 * gap)
    rest = np.flatnonzero(~ok)
    if rest.size == 0:
        return out
    out[rest] = y[rest]
    remaining = np.full(rest.size, h)
    cap = np.full(rest.size, h)
    floor = h * 2.0 ** -SUBSTEP_DEPTH
    floor_rejects = 0
    while rest.size:
        yr = out[rest]
        g = _min_gap(yr)
        hs = np.maximum(np.minimum(np.minimum(remaining, DYSON_KAPPA * g * g), cap), floor)
        hs = np.minimum(hs, remaining)
        prop = yr + _dyson_drift(yr) * hs[:, None] + np.sqrt(hs)[:, None] * rng.standard_normal(yr.shape)
        at_floor = hs <= floor
        acc = _strict(prop) & ((_min_gap(prop) >= 0.5 * g) | at_floor)
        out[rest[acc]] = prop[acc]
        remaining[acc] -= hs[acc]
        cap[acc] = np.minimum(2.0 * cap[acc], h)
        cap[~acc] = hs[~acc] / 4.0
        floor_rejects += int(np.count_nonzero(~acc & at_floor))
        if floor_rejects > 1000:
            raise NumericalError("dyson step could not keep particles ordered", step=floor)
        keep = remaining > h * 1e-12
        rest, remaining, cap = rest[keep], remaining[keep], cap[keep]
    return out


def dyson_step(y, dt, rng):
    """One step of Dyson's non-colliding Brownian motion.

    Euler-Maruyama for the drift ``sum_{j != i} 1 / (y_i - y_j)``, with local
    step halving near collisions (see :func:`_dyson_advance`).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or (y.size > 1 and not _strict(y)):
        raise DomainError("dyson_step: input must be a strictly increasing vector")
    dw = math.sqrt(dt) * rng.standard_normal(y.shape)
    return _dyson_advance(y[None, :], dw[None, :], dt, rng)[0]


# ---------------------------------------------------------------------------
# exact samplers for the entrance laws

def sample_gue_spectrum(n, t, rng, size=None):
    """Ordered eigenvalues of a scaled GUE matrix (density ``mu^n_t``).

    Uses the beta = 2 tridiagonal model: diagonal N(0, 1), off-diagonal
    ``chi_{2k} / sqrt 2`` for k = n-1, ..., 1, all scaled by ``sqrt t``.
    Returns shape ``(n,)`` or ``(size, n)``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not t > 0:
        raise DomainError("t must be > 0")
    m = 1 if size is None else int(size)
    diag = rng.standard_normal((m, n))
    if n == 1:
        vals = diag
    else:
        dof = 2.0 * np.arange(n - 1, 0, -1)
        off = np.sqrt(rng.chisquare(dof, size=(m, n - 1)) / 2.0)
        mat = np.zeros((m, n, n))
        idx = np.arange(n)
        mat[:, idx, idx] = diag
        mat[:, idx[:-1], idx[1:]] = off
        mat[:, idx[1:], idx[:-1]] = off
        try:
            vals = np.linalg.eigvalsh(mat)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("tridiagonal eigensolver failed to converge") from exc
    vals = math.sqrt(t) * np.sort(vals, axis=-1)
    return vals[0] if size is None else vals


def _sample_lambda_rows(x, rng, max_rounds=10_000):
    """One draw from ``lambda^{k-1}(x, .)`` for each row of ``x`` (B, k).

    Rejection from the uniform law on the interlacing box with acceptance
    probability ``h(y) / prod_{i<j}(x_{j+1} - x_i)``.  Returns
    ``(samples, proposals)``.
    """
    b, k = x.shape
    if k == 1:
        return np.empty((b, 0)), b
    lo, width = x[:, :-1], np.diff(x, axis=1)
    if np.any(width <= 0):
        raise DomainError("row must be strictly increasing")
    i, j = np.triu_indices(k - 1, k=1)
    bound = np.prod(x[:, j + 1] - x[:, i], axis=1) if len(i) else np.ones(b)
    out = np.empty((b, k - 1))
    pending = np.arange(b)
    proposals = 0
    for _ in range(max_rounds):
        if pending.size == 0:
            return out, proposals
        prop = lo[pending] + width[pending] * rng.random((pending.size, k - 1))
        proposals += pending.size
        h = np.asarray(vandermonde_h(prop)).reshape(-1)
        accept = rng.random(pending.size) * bound[pending] < h
        out[pending[accept]] = prop[accept]
        pending = pending[~accept]
    raise NumericalError("pattern rejection sampler did not terminate")


def lambda_acceptance_probability(x):
    """Analytic acceptance rate of the row sampler below the row ``x``."""
    x = np.asarray(x, dtype=float)
    k = x.shape[-1]
    if k < 2:
        return 1.0
    integral = vandermonde_h(x) / math.factorial(k - 1)
    box = float(np.prod(np.diff(x)))
    i, j = np.triu_indices(k - 1, k=1)
    bound = float(np.prod(x[j + 1] - x[i])) if len(i) else 1.0
    return float(integral / (box * bound))


def sample_gt_pattern(top, rng):
    """Uniform pattern of the Gelfand-Tsetlin polytope below ``top``.

    Rows are drawn top-down, row ``k-1`` from ``lambda^{k-1}(row_k, .)``.
    Returns the rows ``[x^1, ..., x^n]`` as 1-D arrays.
    """
    top = np.asarray(top, dtype=float)
    if not _strict(top) and top.size > 1:
        raise DomainError("sample_gt_pattern: top row must be strictly increasing")
    rows = _fill_patterns(top[None, :], rng)
    return [r[0] for r in rows]


def _fill_patterns(top, rng):
    rows = [top]
    while rows[0].shape[1] > 1:
        below, _ = _sample_lambda_rows(rows[0], rng)
        rows.insert(0, below)
    return rows


# ---------------------------------------------------------------------------
# starts

def _spread_interlaced(n, eps):
    z = (np.arange(2 * n + 1) - n) * eps
    return z[0::2].copy(), z[1::2].copy()


def _spread_pattern(n, eps):
    return [((2 * np.arange(k) - k + 1) * eps / 2.0) for k in range(1, n + 1)]


def _check_interlaced_start(x0, y0, strict_y=False):
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    if x0.size != y0.size + 1:
        raise DomainError("start: len(x0) must equal len(y0) + 1")
    if y0.size and not (np.all(x0[:-1] <= y0) and np.all(y0 <= x0[1:])):
        raise DomainError("start point is not interlaced")
    if strict_y and y0.size > 1 and not _strict(y0):
        raise DomainError("start: y0 must be strictly increasing")
    return x0, y0


# ---------------------------------------------------------------------------
# interlaced pair

def _pair_columns(n):
    return [f"x{i + 1}" for i in range(n + 1)] + [f"y{i + 1}" for i in range(n)]


def _assert_interlaced(x, y, what):
    if y.shape[1] and not (np.all(x[:, :-1] <= y) and np.all(y <= x[:, 1:])):
        raise NumericalError(f"{what}: interlacing violated")


def _pair_engine(cfg, x0, y0, t_start, steps, dt, plus, rng, size, sample_start=None):
    n = y0.shape[-1] if sample_start is None else None
    if sample_start is not None:
        x, y = sample_start(rng, size)
        n = y.shape[1]
    else:
        x = np.repeat(x0[None, :], size, axis=0)
        y = np.repeat(y0[None, :], size, axis=0)
    lm = np.zeros_like(x)
    lp = np.zeros_like(x)
    alive = np.ones(size, dtype=bool)
    tau = np.full(size, np.inf)
    rec = [np.concatenate([x, y], axis=1)] if cfg.record_every else None
    sq = math.sqrt(dt)
    for step in range(steps):
        dbeta = sq * rng.standard_normal((size, n))
        dgam = sq * rng.standard_normal((size, n + 1))
        if plus:
            y_new = _dyson_advance(y, dbeta, dt, rng)
        else:
            y_new = y + dbeta
            if n >= 2:
                a = np.diff(y, axis=1)
                bgap = np.diff(y_new, axis=1)
                hit = bgap <= 0
                if cfg.bridge_correction:
                    u = rng.random(a.shape)
                    with np.errstate(over="ignore"):
                        hit |= u < np.exp(-np.maximum(a, 0) * np.maximum(bgap, 0) / dt)
                killed = alive & hit.any(axis=1)
                if killed.any():
                    tau[killed] = t_start + (step + 1) * dt
                    alive &= ~killed
                # stopped paths stay frozen at their pre-step state
                y_new = np.where(alive[:, None], y_new, y)
                dgam = np.where(alive[:, None], dgam, 0.0)
        x_new, dlm, dlp = _reflect_row(x, y, y_new, dgam, cfg.bridge_correction, dt, rng)
        if not plus and n >= 2:
            x_new = np.where(alive[:, None], x_new, x)
            dlm = np.where(alive[:, None], dlm, 0.0)
            dlp = np.where(alive[:, None], dlp, 0.0)
        if cfg.check_invariants:
            _assert_interlaced(x_new, y_new, "interlaced pair")
            if np.any(dlm < 0) or np.any(dlp < 0) or np.any(dlm * dlp != 0):
                raise NumericalError("local time increments inconsistent")
            if np.any(dlm[:, 0] != 0) or np.any(dlp[:, -1] != 0):
                raise NumericalError("exceptional local times must vanish")
        x, y = x_new, y_new
        lm += dlm
        lp += dlp
        if rec is not None and (step + 1) % cfg.record_every == 0:
            rec.append(np.concatenate([x, y], axis=1))
    out = {"terminal": np.concatenate([x, y], axis=1), "lm": lm, "lp": lp,
           "alive": alive, "tau": tau}
    if rec is not None:
        out["paths"] = np.stack(rec, axis=1)
    return out


def _pair_result(cfg, res, n, t_start, steps, start=None):
    extras = {"local_time_minus": res["lm"], "local_time_plus": res["lp"],
              "stopped": ~res["alive"], "tau": res["tau"]}
    return _batch(cfg, res["terminal"], _pair_columns(n), t_start, steps, extras,
                  res.get("paths"), start)


def simulate_interlaced_pair(x0, y0, cfg, workers=None):
    """Interlaced pair with Y a free Brownian motion, stopped at the first
    collision of two Y particles (state frozen from then on; see
    ``extras['stopped']``)."""
    x0, y0 = _check_interlaced_start(x0, y0)
    n = y0.size
    steps, dt = _time_grid(0.0, cfg.horizon_t, cfg.dt)
    res = _run_blocks(cfg, lambda rng, size: _pair_engine(cfg, x0, y0, 0.0, steps, dt, False,
                                                          rng, size), workers)
    return _pair_result(cfg, res, n, 0.0, steps)


def simulate_interlaced_pair_plus(x0, y0, cfg, workers=None, n=None):
    """Interlaced pair with Y a Dyson non-colliding motion.

    Start from ``(x0, y0)`` if given; otherwise ``cfg.start`` (default
    ``EntranceStart(1e-3 * horizon)``) with ``n`` Y-particles.
    """
    start = cfg.start
    if x0 is not None:
        x0, y0 = _check_interlaced_start(x0, y0, strict_y=True)
        n = y0.size
        start = None
    elif n is None:
        raise DomainError("give a start point or the number n of Y particles")
    elif start is None:
        start = EntranceStart(1e-3 * cfg.horizon_t)

    sampler = None
    t_start = 0.0
    if isinstance(start, EntranceStart):
        t_start = start.t0

        def sampler(rng, size):
            xs = sample_gue_spectrum(n + 1, start.t0, rng, size)
            ys, _ = _sample_lambda_rows(xs, rng)
            return xs, ys
    elif isinstance(start, SpreadStart):
        x0, y0 = _spread_interlaced(n, start.eps)

    steps, dt = _time_grid(t_start, cfg.horizon_t, cfg.dt)
    res = _run_blocks(cfg, lambda rng, size: _pair_engine(cfg, x0, y0, t_start, steps, dt, True,
                                                          rng, size, sampler), workers)
    return _pair_result(cfg, res, n, t_start, steps, start)


# ---------------------------------------------------------------------------
# Dyson process on its own

def simulate_dyson(n, cfg, y0=None, workers=None):
    """Dyson Brownian motion with ``n`` particles from ``y0`` or ``cfg.start``."""
    start = cfg.start
    t_start = 0.0
    if y0 is not None:
        y0 = np.asarray(y0, dtype=float).reshape(-1)
        if y0.size > 1 and not _strict(y0):
            raise DomainError("y0 must be strictly increasing")
        n = y0.size
    elif isinstance(start, SpreadStart):
        y0 = (np.arange(n) - (n - 1) / 2.0) * start.eps
    else:
        start = start or EntranceStart(1e-3 * cfg.horizon_t)
        t_start = start.t0
    steps, dt = _time_grid(t_start, cfg.horizon_t, cfg.dt)
    sq = math.sqrt(dt)

    def block(rng, size):
        y = (sample_gue_spectrum(n, t_start, rng, size) if y0 is None
             else np.repeat(y0[None, :], size, axis=0))
        rec = [y] if cfg.record_every else None
        for step in range(steps):
            y = _dyson_advance(y, sq * rng.standard_normal((size, n)), dt, rng)
            if cfg.check_invariants and n > 1 and not np.all(_strict(y)):
                raise NumericalError("dyson: ordering violated")
            if rec is not None and (step + 1) % cfg.record_every == 0:
                rec.append(y)
        out = {"terminal": y}
        if rec is not None:
            out["paths"] = np.stack(rec, axis=1)
        return out

    res = _run_blocks(cfg, block, workers)
    return _batch(cfg, res["terminal"], [f"y{i + 1}" for i in range(n)], t_start, steps,
                  paths=res.get("paths"), start=start)


# ---------------------------------------------------------------------------
# Gelfand-Tsetlin cone

def _gt_columns(n):
    return [f"x{k}_{i}" for k in range(1, n + 1) for i in range(1, k + 1)]


def simulate_gt_cone(n, cfg, workers=None):
    """Reflected Brownian motion in the Gelfand-Tsetlin cone with ``n`` rows.

    Row 1 moves freely; row ``k`` is reflected off row ``k-1`` (each
    coordinate kept between its two neighbours in the row below).
    ``EntranceStart(t0)`` samples the exact time-``t0`` law (GUE top row,
    uniform pattern below); ``SpreadStart(eps)`` starts from a fixed
    eps-spaced pattern at time 0.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    start = cfg.start or EntranceStart(1e-3 * cfg.horizon_t)
    t_start = start.t0 if isinstance(start, EntranceStart) else 0.0
    steps, dt = _time_grid(t_start, cfg.horizon_t, cfg.dt)
    sq = math.sqrt(dt)

    def block(rng, size):
        if isinstance(start, EntranceStart):
            top = sample_gue_spectrum(n, start.t0, rng, size).reshape(size, n)
            rows = _fill_patterns(top, rng)
        else:
            rows = [np.repeat(r[None, :], size, axis=0) for r in _spread_pattern(n, start.eps)]
        lm = [np.zeros_like(r) for r in rows]
        lp = [np.zeros_like(r) for r in rows]
        rec = [np.concatenate(rows, axis=1)] if cfg.record_every else None
        for step in range(steps):
            noise = sq * rng.standard_normal((size, n * (n + 1) // 2))
            new_rows = [rows[0] + noise[:, :1]]
            off = 1
            for k in range(2, n + 1):
                dg = noise[:, off:off + k]
                off += k
                xk, dlm, dlp = _reflect_row(rows[k - 1], rows[k - 2], new_rows[k - 2], dg,
                                            cfg.bridge_correction, dt, rng)
                lm[k - 1] += dlm
                lp[k - 1] += dlp
                if cfg.check_invariants:
                    _assert_interlaced(xk, new_rows[k - 2], "GT cone")
                    if np.any(dlm * dlp != 0):
                        raise NumericalError("GT cone: both local times moved in one step")
                new_rows.append(xk)
            rows = new_rows
            if rec is not None and (step + 1) % cfg.record_every == 0:
                rec.append(np.concatenate(rows, axis=1))
        out = {"terminal": np.concatenate(rows, axis=1),
               "lm": np.concatenate(lm, axis=1), "lp": np.concatenate(lp, axis=1)}
        if rec is not None:
            out["paths"] = np.stack(rec, axis=1)
        return out

    res = _run_blocks(cfg, block, workers)
    extras = {"local_time_minus": res["lm"], "local_time_plus": res["lp"]}
    return _batch(cfg, res["terminal"], _gt_columns(n), t_start, steps, extras, res.get("paths"),
                  start)


def gt_row(batch, k):
    """Terminal samples of row ``k`` (1-based) from a GT-cone batch."""
    cols = [batch.columns.index(f"x{k}_{i}") for i in range(1, k + 1)]
    return batch.terminal[:, cols]


# ---------------------------------------------------------------------------
# last-passage functional

def sup_functional(increments):
    """``sup_{0 = t_0 <= ... <= t_n = T} sum_i (B_i(t_i) - B_i(t_{i-1}))`` on a grid.

    ``increments`` has shape ``(..., n, steps)``: the grid increments of
    ``n`` paths.  Computed by the recursion
    ``M_k(t) = max_{s <= t} (M_{k-1}(s) - B_k(s)) + B_k(t)``, O(n * steps).
    """
    inc = np.asarray(increments, dtype=float)
    if inc.ndim < 2:
        raise DomainError("increments must have shape (..., n, steps)")
    zero = np.zeros(inc.shape[:-1] + (1,))
    paths = np.concatenate([zero, np.cumsum(inc, axis=-1)], axis=-1)
    m = paths[..., 0, :]
    for k in range(1, inc.shape[-2]):
        b = paths[..., k, :]
        m = np.maximum.accumulate(m - b, axis=-1) + b
    return m[..., -1][()]


def simulate_sup_functional(n, cfg, workers=None):
    """Sup-functional of ``n`` independent Brownian motions on
    ``[0, horizon_t]``, streaming the recursion (memory O(paths * n)).

    Columns ``m1..mn`` hold the functional of the first ``k`` motions.
    Without bridge correction they are the grid values of
    :func:`sup_functional`.  With it, the running maximum of
    ``M_{k-1} - B_k`` also takes the maximum over each step of a Brownian
    bridge (variance 2 per unit time) between the grid values, which
    removes the O(sqrt(dt)) downward bias of the grid maximum; this is
    exact for ``k = 2`` and a local approximation above, where ``M_{k-1}``
    switches driver inside a step.  ``extras['grid']`` always holds the
    plain grid values computed from the same increments.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    steps, dt = _time_grid(0.0, cfg.horizon_t, cfg.dt)
    sq = math.sqrt(dt)
    bridge = cfg.bridge_correction

    def block(rng, size):
        g = np.zeros((size, n))
        run = np.zeros((size, n))
        m = np.zeros((size, n))
        run_grid = np.zeros((size, n))
        m_grid = np.zeros((size, n))
        for _ in range(steps):
            d_old = m[:, :-1] - g[:, 1:]
            g += sq * rng.standard_normal((size, n))
            m[:, 0] = g[:, 0]
            m_grid[:, 0] = g[:, 0]
            e = rng.standard_exponential((size, n - 1)) if bridge and n > 1 else None
            for k in range(1, n):
                np.maximum(run_grid[:, k], m_grid[:, k - 1] - g[:, k], out=run_grid[:, k])
                m_grid[:, k] = run_grid[:, k] + g[:, k]
                d_new = m[:, k - 1] - g[:, k]
                if bridge:
                    c = d_new - d_old[:, k - 1]
                    top = 0.5 * (d_old[:, k - 1] + d_new + np.sqrt(c * c + 4.0 * dt * e[:, k - 1]))
                    np.maximum(run[:, k], top, out=run[:, k])
                else:
                    np.maximum(run[:, k], d_new, out=run[:, k])
                m[:, k] = run[:, k] + g[:, k]
        return {"terminal": m, "grid": m_grid}

    res = _run_blocks(cfg, block, workers)
    return _batch(cfg, res["terminal"], [f"m{k + 1}" for k in range(n)], 0.0, steps,
                  {"grid": res["grid"]})


# ---------------------------------------------------------------------------
# coalescing Brownian motions

def simulate_coalescing(z, cfg, workers=None):
    """Coalescing Brownian motions started from the ordered point ``z``.

    Each cluster moves with the increments of its lowest-index member.
    Adjacent clusters merge when their order flips within a step or, with
    bridge correction, with probability ``exp(-a b / dt)`` for start/end
    gaps ``a, b`` (the gap is a variance-2 Brownian motion).
    ``extras['owner']`` gives each particle's driving index.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    if np.any(np.diff(z) < 0):
        raise DomainError("coalescing start must be ordered")
    n = z.size
    steps, dt = _time_grid(0.0, cfg.horizon_t, cfg.dt)
    sq = math.sqrt(dt)
    init_owner = np.arange(n)
    for i in range(1, n):
        if z[i] == z[i - 1]:
            init_owner[i] = init_owner[i - 1]

    def block(rng, size):
        pos = np.repeat(z[None, :], size, axis=0)
        owner = np.repeat(init_owner[None, :], size, axis=0)
        rows = np.arange(size)[:, None]
        rec = [pos] if cfg.record_every else None
        for step in range(steps):
            dw = sq * rng.standard_normal((size, n))
            new = pos + dw[rows, owner]
            u = rng.random((size, max(n - 1, 1))) if cfg.bridge_correction else None
            for i in range(n - 1):
                separate = owner[:, i + 1] != owner[:, i]
                a = pos[:, i + 1] - pos[:, i]
                b = new[:, i + 1] - new[:, i]
                hit = b <= 0
                if cfg.bridge_correction:
                    with np.errstate(over="ignore"):
                        hit |= u[:, i] < np.exp(-np.maximum(a, 0) * np.maximum(b, 0) / dt)
                merge = separate & hit
                if merge.any():
                    idx = np.flatnonzero(merge)
                    old = owner[idx, i + 1][:, None]
                    tgt = owner[idx, i][:, None]
                    same = owner[idx] == old
                    owner[idx] = np.where(same, tgt, owner[idx])
                    new[idx] = np.where(same, new[idx, i][:, None], new[idx])
            if cfg.check_invariants:
                if np.any(np.diff(new, axis=1) < 0):
                    raise NumericalError("coalescing: ordering violated")
            pos = new
            if rec is not None and (step + 1) % cfg.record_every == 0:
                rec.append(pos)
        out = {"terminal": pos, "owner": owner}
        if rec is not None:
            out["paths"] = np.stack(rec, axis=1)
        return out

    res = _run_blocks(cfg, block, workers)
    return _batch(cfg, res["terminal"], [f"z{i + 1}" for i in range(n)], 0.0, steps,
                  {"owner": res["owner"]}, res.get("paths"))
