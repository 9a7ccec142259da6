"""Acceptance criteria at their stated tolerances and default seeds.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from interlacing import cli
from interlacing import simulate as S
from interlacing import verify as V


def record(number, title, passed, detail):
    ACCEPTANCE_LINES.append(f"[{number:2d}] {'PASS' if passed else 'FAIL'}  {title}: {detail}")
    assert passed, detail


def test_01_intertwining():
    t0 = time.perf_counter()
    r1 = V.check_intertwining(1)
    r2 = V.check_intertwining(2)
    elapsed = time.perf_counter() - t0
    ok = r1.discrepancy < 1e-8 and r2.discrepancy < 1e-6 and elapsed < 30
    record(1, "intertwining", ok,
           f"n=1 max residual {r1.discrepancy:.2e} (<1e-8, {r1.inputs['count']} configs), "
           f"n=2 {r2.discrepancy:.2e} (<1e-6, {r2.inputs['count']} configs), {elapsed:.1f}s")


def test_02_duality():
    r = V.check_duality()
    ratios = r.details["h_ratios"]
    ok = (r.inputs["pairs"] == 100 and r.details["transpose_mismatches"] == 0
          and all(3.5 <= x <= 4.5 for x in ratios))
    record(2, "duality", ok, f"transpose mismatches 0/100, h-ratios "
           + ", ".join(f"{x:.3f}" for x in ratios) + " in [3.5, 4.5]")


def test_03_pde_boundaries():
    r = V.check_pde_and_boundaries()
    ok = r.passed and r.wall_time < 10
    d = r.details
    ratios = ", ".join(f"{v:.2f}" for v in d["heat_ratios"].values())
    record(3, "PDE/boundary", ok, f"heat ratios {ratios}; q at y_i=y_i+1 {d['vanishing']:.1e}; "
           f"max Neumann {max(d['neumann'].values()):.1e}; {r.wall_time:.1f}s")


def test_04_semigroup():
    reps = [V.check_chapman_kolmogorov("km_plus"), V.check_chapman_kolmogorov("r"),
            V.check_entrance_law()]
    ok = all(r.passed and r.discrepancy < 1e-6 for r in reps)
    record(4, "semigroup", ok, "CK p2+ {:.2e}, CK r2 {:.2e}, entrance law {:.2e} (<1e-6)"
           .format(*[r.discrepancy for r in reps]))


def test_05_interlace_law():
    cfg = S.SimConfig(1.0, 1e-4, 100_000, seed=20240521)
    r = V.check_interlace_law(1, 1.0, cfg)
    p = r.details["ks"]["max"]["p_value"]
    ok = p >= 0.01 and r.wall_time < 300
    record(5, "interlace", ok, f"KS p(X-max) = {p:.3f} (>=0.01), seed 20240521, "
           f"{r.wall_time:.0f}s")


def test_06_identity_sup():
    cfg = S.SimConfig(1.0, 1e-4, 100_000, seed=20240522)
    r = V.check_identity_sup(3, 1.0, cfg)
    grid = r.details["grid_ks"]["statistic"]
    ok = r.discrepancy < 0.01 and r.wall_time < 300
    record(6, "sup identity", ok, f"sup-norm {r.discrepancy:.4f} bridge-corrected, "
           f"{grid:.4f} plain grid (<0.01), {r.wall_time:.0f}s")


def test_07_gue_consistency():
    r = V.check_gue_top(3, 1.0, 100_000)
    record(7, "GUE consistency", r.discrepancy >= 0.01,
           f"KS p = {r.discrepancy:.3f} (>=0.01), 1e5 spectra")


def test_08_coalescing():
    t0 = time.perf_counter()
    reps = V.run_suite("coalescing")
    elapsed = time.perf_counter() - t0
    ok = all(r.passed for r in reps) and len(reps[0].details["grid"]) == 25 and elapsed < 300
    record(8, "coalescing", ok, f"worst |emp-exact|/SE n=2 {reps[0].discrepancy:.2f}, "
           f"n=3 {reps[1].discrepancy:.2f} (<=3), {elapsed:.0f}s")


def test_09_small_t():
    r = V.check_small_t()
    seqs = r.details["discrepancies"]
    ok = r.passed and all(all(np.diff(v) < 0) for v in seqs.values())
    record(9, "small-t", ok, "; ".join(f"{k}: " + ", ".join(f"{x:.2e}" for x in v)
                                       for k, v in seqs.items()))


def test_10_determinism(tmp_path):
    blobs = []
    for w in (1, 4, 8):
        out = tmp_path / f"w{w}.csv"
        cfg = S.SimConfig(1.0, 0.01, 40_000, seed=20240530)
        assert cli.cmd_simulate("pair_plus", cfg, str(out), n=2, workers=w) == 0
        blobs.append(out.read_bytes() + (tmp_path / f"w{w}.csv.meta.json").read_bytes())
    same = blobs[0] == blobs[1] == blobs[2]
    record(10, "determinism", same, "byte-identical samples and metadata at 1, 4, 8 workers"
           if same else "outputs differ across worker counts")
