import math

import numpy as np
import pytest

from ecirbond import (CoefficientFunction, ECIRModel, PricingWindow, compute_A, price, price_const_k,
                      price_timedep, riccati_from_series, series_coefficients, truncation_bound)
from ecirbond.errors import CapacityError, ConfigError, SeriesDivergenceError

from conftest import cir_closed_form, constant_model

W = PricingWindow(0.8, 1.0)


def test_zero_volatility_coefficients():
    m = constant_model(sigma=0.0)
    c = series_coefficients(W, m, N=3, m_max=2)
    assert c[0] == 1.0 and c[1] == 0.0 and c[2] == 0.0


def test_A0_A1_low_order_values(flat_model):
    a0 = 1 - 0.02 + 0.2 ** 4 / 6 + 0.2 ** 4 / 8
    assert compute_A(0, W, flat_model, N=2) == pytest.approx(a0, rel=1e-12)
    assert compute_A(0, W, flat_model, N=2) == pytest.approx(0.980467, abs=1e-6)
    c = series_coefficients(W, flat_model, N=1, tol=0)
    assert c.terms[(1, 1)] == pytest.approx(2 * 0.2 ** 3 / 3, rel=1e-12)
    assert c.orders == (1, 1)


def test_partial_sums_and_mixed_truncation(flat_model):
    # A_0 to second order with only the leading A_1 term gives B = 0.2 - 0.0054396
    c = series_coefficients(W, flat_model, N=3, tol=0)
    a0, a1_lead = c.partial(0, 2), c.partial(1, 1)
    assert a1_lead / a0 == pytest.approx(0.0054396, abs=1e-7)
    assert 0.2 - a1_lead / a0 == pytest.approx(0.194560, abs=1e-6)
    mixed_price = a0 * math.exp(-(0.2 - a1_lead / a0) * 0.5)
    assert mixed_price == pytest.approx(0.8896, abs=5e-5)
    # matched truncation at N=2 is much closer to the exact B
    exact = cir_closed_form(0, 1, 1, 0.2)[1]
    matched = 0.2 - c.partial(1, 2) / c.partial(0, 2)
    assert abs(matched - exact) < 2e-5 < abs(0.194560 - exact)


def test_price_examples(flat_model):
    p = price_const_k(W, flat_model, N=2, r_t=0.5)
    assert p.price == pytest.approx(0.889453, abs=1e-6)
    A, B = cir_closed_form(0, 1, 1, 0.2)
    assert p.price == pytest.approx(A * math.exp(-B * 0.5), abs=2e-5)
    assert 0 < p.price <= 1
    assert price_const_k(PricingWindow(1.0, 1.0), flat_model, r_t=0.5).price == 1.0
    dead = constant_model(sigma=0.0)
    assert price_const_k(W, dead, r_t=0.5).price == pytest.approx(math.exp(-0.1), abs=1e-15)


def test_degenerate_window_coefficients(flat_model):
    c = series_coefficients(PricingWindow(1.0, 1.0), flat_model, N=3, m_max=2)
    assert c.values == (1.0, 0.0, 0.0)


def test_timedep_reduces_to_const(flat_model):
    a = price_const_k(W, flat_model, N=3, r_t=0.5)
    b = price_timedep(W, flat_model, N=3, r_t=0.5)
    assert b.price == pytest.approx(a.price, rel=1e-12)


def test_zero_volatility_time_dependent_drift():
    m = constant_model(k=1.0, sigma=0.0, r0=0.5)
    w = PricingWindow(0.0, 1.0)
    doubled = price(w, m)
    assert doubled.price == pytest.approx(math.exp(-0.5 * (1 - math.exp(-2)) / 2), abs=1e-12)
    assert doubled.price == pytest.approx(0.805601, abs=1e-6)
    printed = price(w, m, time_factor_convention="printed")
    assert printed.price == pytest.approx(math.exp(-0.5 * (1 - math.exp(-1))), abs=1e-12)
    assert printed.price == pytest.approx(0.729016, abs=1e-6)


def test_riccati_pair(flat_model):
    A, B = riccati_from_series(W, constant_model(sigma=0.0))
    assert (A, B) == (1.0, pytest.approx(0.2))
    A, B = riccati_from_series(W, flat_model, N=3)
    p = price_const_k(W, flat_model, N=3, r_t=0.37)
    assert A * math.exp(-B * 0.37) == pytest.approx(p.price, rel=1e-14)


def test_identity_between_coefficients(flat_model):
    w = PricingWindow(0.9, 1.0)
    c = series_coefficients(w, flat_model, N=4, m_max=2, tol=0)
    assert abs(2 * c[0] * c[2] - c[1] ** 2) <= 1e-8


def test_converges_to_closed_form(flat_model):
    exact = cir_closed_form(0, 1, 1, 0.2)[1]
    gaps = [abs(riccati_from_series(W, flat_model, N=n, tol=0)[1] - exact) for n in range(2, 6)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-9


def test_time_dependent_volatility_against_quadrature_riccati():
    from ecirbond import riccati_price

    sig = CoefficientFunction.parse("sin", 1.0)
    m = ECIRModel(CoefficientFunction.const(0.5), sig, 2, 0.5)
    p = price(W, m, N=4, r_t=0.5)
    assert p.price == pytest.approx(riccati_price(W, m, 0.5), abs=1e-7)


def test_truncation_bound_examples(flat_model):
    assert truncation_bound(2, 0, W, flat_model) == pytest.approx(0.26 ** 3 / 0.74, rel=1e-12)
    assert truncation_bound(2, 0, PricingWindow(1.0, 1.0), flat_model) == 0.0
    assert truncation_bound(2, 0, PricingWindow(0.0, 1.0), flat_model) == math.inf
    assert truncation_bound(3, 1, W, flat_model) < truncation_bound(2, 1, W, flat_model)
    with pytest.raises(ValueError):
        truncation_bound(2, 0, W, flat_model, beta=2)
    with pytest.raises(ValueError):
        truncation_bound(2, 0, W, flat_model, alpha=0.5)


def test_errors(flat_model):
    with pytest.raises(CapacityError):
        series_coefficients(W, flat_model, N=7)
    with pytest.raises(CapacityError, match="budget"):
        series_coefficients(W, flat_model, N=4, budget=1000)
    with pytest.raises(ConfigError):
        price_const_k(W, flat_model, N=2)            # r_t required when t > 0
    with pytest.raises(ConfigError):
        price_const_k(W, constant_model(k=1.0), N=2, r_t=0.5)
    with pytest.raises(ValueError):
        compute_A(3, W, flat_model, N=2)
    big = constant_model(sigma=3.0)
    with pytest.raises(SeriesDivergenceError, match="tail bound"):
        price_const_k(PricingWindow(0.0, 1.0), big, N=1)


def test_early_stopping_and_diagnostics(flat_model):
    c = series_coefficients(PricingWindow(0.99, 1.0), flat_model, N=6, tol=1e-8, diagnostics=True)
    assert max(c.orders) < 6
    assert all(g < 1e-12 for g in c.quadrature_gaps.values())
    assert np.isfinite(c.tail_bounds).all()
