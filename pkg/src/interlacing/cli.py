"""Command-line front end.

    interlacing density SUB [--n N] [--t T] [point options] [--grid VAR=start:stop:num ...]
    interlacing simulate PROCESS [--n N] [--t T] [--dt DT] [--paths P] [--seed S] ...
    interlacing verify SUITE [--tol NAME=VALUE ...] [--paths P] [--dt DT] [--seed S]

Vectors are comma separated; write negative values with ``=`` (``--x=-1,1``).
Grid variables are scalar parameters (``t``, or ``x`` for ``top_cdf``) or
1-based vector components such as ``y2_1``.

Exit codes: 0 success / all checks pass, 1 verification failure or
numerical failure, 2 usage or domain error, 3 I/O error.
"""

import argparse
import itertools
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import densities as D
from . import simulate as S
from . import verify as V
from .errors import CapabilityError, DomainError, NumericalError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _fmt(v):
    return format(float(v), ".17g")


def _vector(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"cannot parse vector {text!r}") from exc


def _pattern(text):
    return [_vector(row) for row in text.split(";")]


def _grid_axis(spec):
    try:
        name, rng = spec.split("=", 1)
        start, stop, num = rng.split(":")
        num = int(num)
        if num < 1:
            raise ValueError
        return name.strip(), np.linspace(float(start), float(stop), num)
    except ValueError as exc:
        raise DomainError(f"bad grid spec {spec!r}; expected VAR=start:stop:num") from exc


def _start_mode(text):
    if text is None:
        return None
    try:
        mode, val = text.split(":", 1)
        val = float(val)
    except ValueError as exc:
        raise DomainError(f"bad --start {text!r}; expected spread:EPS or entrance:T0") from exc
    if mode == "spread":
        return S.SpreadStart(val)
    if mode == "entrance":
        return S.EntranceStart(val)
    raise DomainError(f"unknown start mode {mode!r}")


@dataclass
class RunConfig:
    """Validated parameters of one command, echoed into every output."""
    command: str
    target: str
    params: dict = field(default_factory=dict)
    out: str = "-"
    fmt: str = "csv"

    def echo(self, **extra):
        return V._jsonable({"tool": "interlacing", "version": __version__,
                            "command": self.command, "target": self.target,
                            "params": self.params, **extra})


# ---------------------------------------------------------------------------
# output

def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OSError(f"output directory does not exist: {directory}")
    return open(path, "w", newline=""), True


def _write_table(path, fmt, meta, columns, rows):
    fh, close = _open_out(path)
    try:
        if fmt == "json":
            json.dump({"meta": meta, "columns": columns,
                       "rows": [[float(v) for v in r] for r in rows]}, fh, indent=1)
            fh.write("\n")
        else:
            fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
            fh.write(",".join(columns) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(v) for v in r) + "\n")
    finally:
        if close:
            fh.close()


# ---------------------------------------------------------------------------
# density

DENSITIES = {
    "km": (("y", "y2"), lambda p, n, t: D.km_density(p["y"], p["y2"], t)),
    "km_plus": (("y", "y2"), lambda p, n, t: D.km_density_plus(p["y"], p["y2"], t)),
    "q": (("x", "y", "x2", "y2"),
          lambda p, n, t: D.q_density((p["x"], p["y"]), (p["x2"], p["y2"]), t)),
    "q_plus": (("x", "y", "x2", "y2"),
               lambda p, n, t: D.q_density_plus((p["x"], p["y"]), (p["x2"], p["y2"]), t)),
    "r": (("x", "x2"), lambda p, n, t: D.r_density(p["x"], p["x2"], t)),
    "mu": (("y",), lambda p, n, t: D.entrance_mu(p["y"], t)),
    "nu": (("x", "y"), lambda p, n, t: D.entrance_nu((p["x"], p["y"]), t)),
    "lambda": (("x", "y"), lambda p, n, t: D.lambda_kernel(p["x"], p["y"])),
    "gt_mu": (("pattern",), lambda p, n, t: D.gt_entrance_density(_unflatten(p["pattern"]), t)),
    "top_cdf": (("x",), lambda p, n, t: D.top_eigenvalue_cdf(n, p["x"][0], t)),
    "coalescing_cdf": (("z", "z2"), lambda p, n, t: D.coalescing_cdf(p["z"], p["z2"], t)),
}


def _unflatten(flat):
    rows, k, i = [], 1, 0
    while i < len(flat):
        rows.append(flat[i:i + k])
        i += k
        k += 1
    if sum(len(r) for r in rows) != len(flat) or len(rows[-1]) != len(rows):
        raise DomainError("pattern length must be a triangular number")
    return rows


def _assign(params, t, name, value):
    """Set grid variable ``name`` (``t``, a scalar parameter, or ``vec_i``)."""
    if name == "t":
        return params, value
    if name in params:
        if len(params[name]) != 1:
            raise DomainError(f"grid variable {name!r} is a vector; use {name}_1, {name}_2, ...")
        params[name] = [value]
        return params, t
    base, _, idx = name.rpartition("_")
    if base in params and idx.isdigit() and 1 <= int(idx) <= len(params[base]):
        params[base][int(idx) - 1] = value
        return params, t
    raise DomainError(f"unknown grid variable {name!r}")


def cmd_density(sub, params, t=1.0, n=None, grid=(), out="-", fmt="csv"):
    """Evaluate a density on a Cartesian grid and write a table."""
    if sub not in DENSITIES:
        raise DomainError(f"unknown density {sub!r}")
    names, fun = DENSITIES[sub]
    axes = [_grid_axis(g) for g in grid]
    params = dict(params)
    for name, _ in axes:
        if name in names and params.get(name) is None:
            params[name] = [0.0]
    missing = [k for k in names if params.get(k) is None]
    if missing:
        raise DomainError(f"density {sub} needs --{' --'.join(missing)}")
    if sub == "top_cdf" and n is None:
        raise DomainError("top_cdf needs --n")
    base = {k: list(params[k]) for k in names}
    rows = []
    for combo in itertools.product(*[a[1] for a in axes]) if axes else [()]:
        p = {k: list(v) for k, v in base.items()}
        tt = t
        for (name, _), value in zip(axes, combo):
            p, tt = _assign(p, tt, name, float(value))
        rows.append(list(combo) + [float(fun({k: np.asarray(v) for k, v in p.items()}, n, tt))])
    run = RunConfig("density", sub, {"t": t, "n": n, **base, "grid": list(grid)}, out, fmt)
    _write_table(out, fmt, run.echo(), [a[0] for a in axes] + ["value"], rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

PROCESSES = ("pair", "pair_plus", "dyson", "gt_cone", "coalescing", "sup_functional")


def cmd_simulate(process, cfg, out, n=1, fmt="csv", workers=None, x0=None, y0=None, z=None):
    """Run a simulator and write one row of terminal samples per path plus a
    sidecar ``<out>.meta.json`` echoing seed and configuration.  Neither
    file depends on the worker count."""
    if process not in PROCESSES:
        raise DomainError(f"unknown process {process!r}")
    if process == "pair":
        if x0 is None:
            eps = cfg.start.eps if isinstance(cfg.start, S.SpreadStart) else 1.0
            x0, y0 = S._spread_interlaced(n, eps)
        batch = S.simulate_interlaced_pair(x0, y0, cfg, workers=workers)
    elif process == "pair_plus":
        batch = S.simulate_interlaced_pair_plus(x0, y0, cfg, workers=workers, n=n)
    elif process == "dyson":
        batch = S.simulate_dyson(n, cfg, y0=y0, workers=workers)
    elif process == "gt_cone":
        batch = S.simulate_gt_cone(n, cfg, workers=workers)
    elif process == "coalescing":
        if z is None:
            raise DomainError("coalescing needs --z")
        batch = S.simulate_coalescing(z, cfg, workers=workers)
    else:
        batch = S.simulate_sup_functional(n, cfg, workers=workers)
    run = RunConfig("simulate", process, {"n": n, "x0": x0, "y0": y0, "z": z}, out, fmt)
    meta = run.echo(seed=cfg.seed, config=batch.config)
    _write_table(out, fmt, meta, batch.columns, batch.terminal)
    if out not in (None, "-"):
        with open(out + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def cmd_verify(suite, out="-", tol=V.DEFAULT_TOLERANCES, cfg_overrides=None, workers=None,
               log=None):
    """Run a verification suite; exit 0 iff every check passes."""
    if suite != "all" and suite not in V.SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from all, {', '.join(V.SUITES)}")

    def progress(rep):
        if log is not None:
            print(f"{rep.test_id:28s} {rep.status.upper():12s} discrepancy={rep.discrepancy:.3g} "
                  f"{rep.comparison} {rep.tolerance:.3g}  ({rep.wall_time:.1f}s)", file=log)

    reports = V.run_suite(suite, tol, cfg_overrides, workers, progress)
    run = RunConfig("verify", suite, {"tolerances": tol, "overrides": cfg_overrides or {}}, out)
    doc = {"meta": run.echo(), "reports": [r.to_dict() for r in reports]}
    fh, close = _open_out(out)
    try:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser():
    parser = argparse.ArgumentParser(prog="interlacing", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"interlacing {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, t_default=1.0):
        p.add_argument("--n", type=int, default=None, help="number of (Y) particles")
        p.add_argument("--t", type=float, default=t_default, help="time / horizon")
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    pd = sub.add_parser("density", help="evaluate a density on a grid")
    pd.add_argument("sub", choices=sorted(DENSITIES))
    common(pd)
    for name in ("x", "y", "x2", "y2", "z", "z2"):
        pd.add_argument(f"--{name}", type=_vector, default=None)
    pd.add_argument("--pattern", type=lambda s: sum(_pattern(s), []), default=None,
                    help="GT pattern rows separated by ';', e.g. '0;-1,1'")
    pd.add_argument("--grid", action="append", default=[], metavar="VAR=start:stop:num")

    ps = sub.add_parser("simulate", help="run a Monte Carlo simulator")
    ps.add_argument("process", choices=PROCESSES)
    common(ps)
    ps.add_argument("--dt", type=float, default=1e-3)
    ps.add_argument("--paths", type=int, default=10_000)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--start", default=None, help="spread:EPS or entrance:T0")
    ps.add_argument("--bridge-correction", choices=("on", "off"), default="on")
    ps.add_argument("--block-size", type=int, default=16384)
    ps.add_argument("--x0", type=_vector, default=None)
    ps.add_argument("--y0", type=_vector, default=None)
    ps.add_argument("--z", type=_vector, default=None)
    ps.add_argument("--workers", type=int, default=None,
                    help=f"threads (default ${S.THREADS_ENV} or 1)")

    pv = sub.add_parser("verify", help="run verification suites")
    pv.add_argument("suite", help="all, " + ", ".join(V.SUITES))
    pv.add_argument("--out", default="-")
    pv.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    pv.add_argument("--paths", type=int, default=None)
    pv.add_argument("--dt", type=float, default=None)
    pv.add_argument("--seed", type=int, default=None)
    pv.add_argument("--workers", type=int, default=None)
    return parser


def _dispatch(args):
    if args.command == "density":
        params = {k: getattr(args, k) for k in ("x", "y", "x2", "y2", "z", "z2", "pattern")}
        return cmd_density(args.sub, params, args.t, args.n, args.grid, args.out, args.fmt)
    if args.command == "simulate":
        cfg = S.SimConfig(horizon_t=args.t, dt=args.dt, n_paths=args.paths, seed=args.seed,
                          bridge_correction=args.bridge_correction == "on",
                          start=_start_mode(args.start), block_size=args.block_size)
        return cmd_simulate(args.process, cfg, args.out, n=args.n or 1, fmt=args.fmt,
                            workers=args.workers, x0=args.x0, y0=args.y0, z=args.z)
    tol = V.DEFAULT_TOLERANCES
    if args.tol:
        pairs = [s.split("=", 1) for s in args.tol]
        if any(len(p) != 2 for p in pairs):
            raise DomainError("--tol expects NAME=VALUE")
        tol = tol.replace(**{k.strip(): v for k, v in pairs})
    overrides = {k: v for k, v in (("n_paths", args.paths), ("dt", args.dt), ("seed", args.seed))
                 if v is not None}
    return cmd_verify(args.suite, args.out, tol, overrides, args.workers, log=sys.stderr)


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (DomainError, CapabilityError, ValueError) as exc:
        print(f"interlacing: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"interlacing: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"interlacing: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
