"""Acceptance gate: one PASS/FAIL line per criterion, printed in the summary."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ecirbond import (McConfig, PricingWindow, g_const, g_timedep, mc_price, parse_config, price,
                      riccati_from_series, riccati_price, series_coefficients)
from ecirbond.experiments import oracle_check, run_experiment_s4
from ecirbond.model import time_factor

from conftest import constant_model

FULL_MC = McConfig(paths=1_000_000, steps=400)


def test_c1_oracle_equivalence(acceptance):
    start = time.perf_counter()
    rows, ok = oracle_check(n_max=3, samples=100, t=0.8, T=1.0, drifts=(0.0, 1.0), rtol=1e-12)
    elapsed = time.perf_counter() - start
    worst = max(float(r[4]) for r in rows)
    ok = ok and elapsed < 10 and len(rows) == 2 * (2 + 3 + 4)
    acceptance("1 oracle equivalence", ok,
               f"{len(rows)} (k, n, m) cells, worst rel err {worst:.2e} <= 1e-12, {elapsed:.2f}s < 10s")
    assert ok


def test_c2_coefficient_identity(acceptance):
    start = time.perf_counter()
    c = series_coefficients(PricingWindow(0.9, 1.0), constant_model(), N=4, q=8, m_max=2, tol=0)
    elapsed = time.perf_counter() - start
    gap = abs(2 * c[0] * c[2] - c[1] * c[1])
    ok = gap <= 1e-8 and elapsed < 30
    acceptance("2 identity 2A0A2 = A1^2", ok, f"|2A0A2 - A1^2| = {gap:.2e} <= 1e-8, {elapsed:.2f}s < 30s")
    assert ok


def test_c3_riccati_agreement(acceptance):
    start = time.perf_counter()
    w, m = PricingWindow(0.8, 1.0), constant_model()
    exact = math.tanh(math.sqrt(2) * 0.2) / math.sqrt(2)
    gaps = [abs(riccati_from_series(w, m, N=n, q=8)[1] - exact) for n in range(2, 6)]
    elapsed = time.perf_counter() - start
    monotone = all(b <= a for a, b in zip(gaps, gaps[1:]))
    ok = gaps[0] <= 5e-4 and monotone and gaps[-1] <= 1e-5 and elapsed < 120
    acceptance("3 Riccati agreement", ok,
               "B gaps N=2..5 " + ", ".join(f"{g:.1e}" for g in gaps)
               + f" (non-increasing: {monotone}), {elapsed:.1f}s < 120s")
    assert ok


def test_c4_experiment_reproduction(acceptance):
    start = time.perf_counter()
    cfg = parse_config("model.k = 0\nmodel.sigma = const:1\nmodel.d = 1\nmodel.r0 = 0.5\n"
                       "window.t = 0.8\nwindow.T = 1\nseries.N = 5\nmc.paths = 1000000\nmc.steps = 400\n")
    rows = run_experiment_s4(cfg)
    elapsed = time.perf_counter() - start
    ok = elapsed < 300
    details = []
    for r in rows:
        if r[3] != "5":
            continue
        diff, se = float(r[8]), float(r[6])
        tol = max(3 * se, 1e-4)
        ok &= diff <= tol
        details.append(f"{r[0]} |d|={diff:.1e}<={tol:.1e}")
    ok &= len(details) == 3
    acceptance("4 three-preset series vs MC", ok, "; ".join(details) + f"; {elapsed:.0f}s < 300s")
    assert ok


def test_c5_time_dependent_drift(acceptance):
    start = time.perf_counter()
    w, m = PricingWindow(0.8, 1.0), constant_model(k=1.0)
    p = price(w, m, N=4, q=8, r_t=0.5).price
    ric = riccati_price(w, m, 0.5)
    mc = mc_price(w, m, 0.5, FULL_MC)
    elapsed = time.perf_counter() - start
    d_ric, d_mc = abs(p - ric), abs(p - mc.mean)
    ok = d_ric <= 1e-3 and d_mc <= 3 * mc.stderr and elapsed < 120
    acceptance("5 time-dependent drift", ok,
               f"series {p:.8f}, |vs Riccati| {d_ric:.1e} <= 1e-3, |vs MC| {d_mc:.1e} <= 3se "
               f"{3 * mc.stderr:.1e}, {elapsed:.0f}s < 120s")
    assert ok


def test_c6_degenerate_suite(acceptance):
    checks = {}
    cfg = McConfig(paths=64, steps=400)
    worst = 0.0
    for k in (0.0, 1.0):
        for t in (0.0, 0.8):
            w, m = PricingWindow(t, 1.0), constant_model(k=k, sigma=0.0)
            target = math.exp(-0.5 * time_factor(w, m))
            for value in (price(w, m, r_t=0.5).price, riccati_price(w, m, 0.5), mc_price(w, m, 0.5, cfg).mean):
                worst = max(worst, abs(value - target))
    checks["sigma=0 all methods"] = worst <= 1e-10

    flat = PricingWindow(1.0, 1.0)
    same = []
    for k in (0.0, 1.0):
        m = constant_model(k=k)
        same += [price(flat, m, r_t=0.5).price, riccati_price(flat, m, 0.5), mc_price(flat, m, 0.5, cfg).mean]
    checks["t=T gives 1"] = all(v == 1.0 for v in same)

    rng = np.random.default_rng(6)
    m1 = constant_model(k=1.0)
    zero = True
    asym = 0.0
    for n in range(1, 6):
        nodes = rng.uniform(0.8, 1.0, (50, n))
        for m in range(n + 3):
            if m > n:
                zero &= bool(np.all(g_const(n, m, nodes, 1.0) == 0)
                             and np.all(g_timedep(n, m, 0.8, nodes, m1, 1.0) == 0))
                continue
            for perm in (np.roll(np.arange(n), 1), np.arange(n)[::-1]):
                for a, b in ((g_const(n, m, nodes, 1.0), g_const(n, m, nodes[:, perm], 1.0)),
                             (g_timedep(n, m, 0.8, nodes, m1, 1.0), g_timedep(n, m, 0.8, nodes[:, perm], m1, 1.0))):
                    scale = np.maximum(np.abs(a), np.abs(b))
                    rel = np.abs(a - b) / np.where(scale > 0, scale, 1.0)
                    asym = max(asym, float(rel.max()))
    checks["G=0 for m>n"] = zero
    checks["permutation symmetry"] = asym <= 1e-12
    ok = all(checks.values())
    acceptance("6 degenerate suite", ok,
               ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items())
               + f" (sigma=0 worst {worst:.1e}, asymmetry {asym:.1e})")
    assert ok


def test_c7_determinism(acceptance, tmp_path):
    cfg = tmp_path / "s4.cfg"
    cfg.write_text("model.k = 0\nmodel.sigma = const:1\nmodel.r0 = 0.5\nwindow.t = 0.8\nwindow.T = 1\n"
                   "series.N = 5\nmc.paths = 100000\nmc.steps = 400\n", encoding="utf-8")
    outs = []
    for name in ("first.csv", "second.csv"):
        out = tmp_path / name
        proc = subprocess.run([sys.executable, "-m", "ecirbond", "experiment-s4", "--config", str(cfg),
                               "--out", str(out)], capture_output=True, text=True, check=False)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1] and outs[0].count(b"\n") == 16
    acceptance("7 experiment-s4 determinism", ok, f"two runs byte-identical ({len(outs[0])} bytes, 15 rows)")
    assert ok
