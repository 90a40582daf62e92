import pytest

from ecirbond import parse_config
from ecirbond.experiments import cumulative_prices, fmt, run_experiment_s4

CFG = ("model.k = 0\nmodel.sigma = const:1\nmodel.r0 = 0.5\nwindow.t = 0.8\nwindow.T = 1\n"
       "series.N = 5\nmc.paths = 4000\nmc.steps = 40\n")


def test_fmt_is_17_significant_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt("sin") == "sin"


def test_series_gap_shrinks_with_terms():
    rows = run_experiment_s4(parse_config(CFG))
    for preset in ("linear_decay", "exp_decay", "sin"):
        gaps = [float(r[9]) for r in rows if r[0] == preset]
        assert len(gaps) == 5
        # non-increasing down to the rounding floor of the Riccati reference
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-7


def test_cumulative_prices_end_at_full_price():
    from ecirbond import price

    cfg = parse_config(CFG)
    model = cfg.build_model("exp_decay")
    prices = cumulative_prices(cfg, model)
    full = price(cfg.pricing_window(), model, N=5, r_t=0.5).price
    assert prices[-1] == pytest.approx(full, rel=1e-14)
