"""Cross-method runs: the three-volatility experiment and the single-model comparison.

Both return rows as lists of strings (floats with 17 significant digits) so
that the CSV written by the command line is byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import series
from .errors import SeriesDivergenceError
from .config import RunConfig
from .model import time_factor
from .oracles import mc_price, riccati_price

EXPERIMENT_COLUMNS = ("preset", "t", "T", "terms", "price_series", "price_mc", "stderr_mc",
                      "price_riccati", "abs_diff_mc", "abs_diff_riccati")
COMPARE_COLUMNS = ("t", "T", "r_t", "terms", "price_series", "price_mc", "stderr_mc",
                   "price_riccati", "abs_diff_mc", "abs_diff_riccati", "status")
PRICE_COLUMNS = ("t", "T", "r_t", "terms", "q", "A0", "A1", "A", "B", "price", "tail_bound")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _series_kwargs(cfg: RunConfig) -> dict:
    s = cfg.series
    return dict(tol=s.tol, mode=s.mode, config=cfg.gnm_config())


def cumulative_prices(cfg: RunConfig, model) -> list[float]:
    """Series price truncated at ``n <= terms`` for ``terms = 1..N``."""
    window = cfg.pricing_window()
    N, r_t = cfg.series.N, cfg.r_t
    if window.tau == 0:
        return [1.0] * N
    coeffs = series.series_coefficients(window, model, N, cfg.series.q, m_max=1, **_series_kwargs(cfg))
    factor = time_factor(window, model, cfg.series.time_factor)
    out = []
    for terms in range(1, N + 1):
        A0, A1 = coeffs.partial(0, terms), coeffs.partial(1, terms)
        if not A0 > 0:
            raise SeriesDivergenceError(f"A_0 = {A0:.6g} <= 0 at truncation {terms}")
        out.append(A0 ** model.d * math.exp(-(factor - A1 / A0) * r_t))
    return out


def run_experiment_s4(cfg: RunConfig) -> list[list[str]]:
    """One row per (volatility preset, term count): series vs MC vs Riccati."""
    window = cfg.pricing_window()
    r_t = cfg.r_t
    rows = []
    for preset in cfg.experiment.preset_list:
        model = cfg.build_model(sigma=preset)
        prices = cumulative_prices(cfg, model)
        mc = mc_price(window, model, r_t, cfg.mc_config())
        ric = riccati_price(window, model, r_t, cfg.riccati.h, cfg.riccati.convention)
        for terms, p in enumerate(prices, start=1):
            rows.append([preset, fmt(window.t), fmt(window.T), fmt(terms), fmt(p), fmt(mc.mean),
                         fmt(mc.stderr), fmt(ric), fmt(abs(p - mc.mean)), fmt(abs(p - ric))])
    return rows


@dataclass(frozen=True)
class CompareResult:
    row: list
    ok: bool
    report: list


def run_compare(cfg: RunConfig) -> CompareResult:
    """Series, Monte Carlo and Riccati on the configured model, with tolerance gates."""
    window = cfg.pricing_window()
    model = cfg.build_model()
    r_t = cfg.r_t
    p = series.price(window, model, cfg.series.N, cfg.series.q, r_t,
                     time_factor_convention=cfg.series.time_factor, **_series_kwargs(cfg))
    mc = mc_price(window, model, r_t, cfg.mc_config())
    ric = riccati_price(window, model, r_t, cfg.riccati.h, cfg.riccati.convention)
    c = cfg.compare
    d_mc, d_ric = abs(p.price - mc.mean), abs(p.price - ric)
    stderr = 0.0 if math.isnan(mc.stderr) else mc.stderr
    report = []
    if d_ric > c.tol_riccati:
        report.append(f"series vs riccati gap {d_ric:.3e} exceeds tol_riccati {c.tol_riccati:.3e}")
    mc_tol = max(c.mc_sigmas * stderr, c.mc_floor)
    if d_mc > mc_tol:
        report.append(f"series vs mc gap {d_mc:.3e} exceeds {mc_tol:.3e}")
    if math.isnan(mc.stderr) or mc.stderr > c.mc_stderr_max:
        report.append(f"mc standard error {mc.stderr:.3e} exceeds mc_stderr_max {c.mc_stderr_max:.3e}")
    ok = not report
    row = [fmt(window.t), fmt(window.T), fmt(r_t), fmt(cfg.series.N), fmt(p.price), fmt(mc.mean),
           fmt(mc.stderr), fmt(ric), fmt(d_mc), fmt(d_ric), "ok" if ok else "breach"]
    return CompareResult(row, ok, report)


def run_price(cfg: RunConfig) -> list[str]:
    window = cfg.pricing_window()
    model = cfg.build_model()
    p = series.price(window, model, cfg.series.N, cfg.series.q, cfg.r_t,
                     time_factor_convention=cfg.series.time_factor, **_series_kwargs(cfg))
    return [fmt(window.t), fmt(window.T), fmt(p.r_t), fmt(p.N), fmt(p.q), fmt(p.A0), fmt(p.A1),
            fmt(p.A), fmt(p.B), fmt(p.price), fmt(p.tail_bound)]


ORACLE_COLUMNS = ("k", "n", "m", "samples", "max_rel_err", "status")


def oracle_check(n_max: int = 3, samples: int = 100, t: float = 0.8, T: float = 1.0,
                 drifts=(0.0, 1.0), seed: int = 0, rtol: float = 1e-12):
    """Compare the symbolic expansion with the recurrence engine on random node tuples.

    Returns ``(rows, ok)``; each row reports the worst relative error over
    ``samples`` tuples drawn uniformly from ``[t, T]^n``.
    """
    import numpy as np

    from . import gnm, symbolic
    from .model import CoefficientFunction, ECIRModel

    gen = np.random.default_rng(seed)
    rows, ok = [], True
    for kval in drifts:
        model = ECIRModel(CoefficientFunction.const(kval, T), CoefficientFunction.const(1.0, T), 1, 0.0)
        for n in range(1, n_max + 1):
            nodes = gen.uniform(t, T, size=(samples, n))
            expected = symbolic.freeze_and_collect(symbolic.differentiate(n), t, T, nodes, model)
            for m in range(n + 1):
                got = gnm.g_timedep(n, m, t, nodes, model, T)
                ref = expected[:, m]
                scale = np.maximum(np.abs(got), np.abs(ref))
                rel = np.divide(np.abs(got - ref), scale, out=np.zeros_like(scale), where=scale > 0)
                worst = float(rel.max())
                good = worst <= rtol
                ok &= good
                rows.append([fmt(kval), fmt(n), fmt(m), fmt(samples), fmt(worst), "ok" if good else "fail"])
    return rows, ok
