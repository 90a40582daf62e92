"""
Mean reversion: drift kernels and the time factor
==================================================

With k = 1 the kernels T - max(a, b) become double exponentials and the
deterministic part of the exponent is int_t^T exp(-2 int_t^s k) ds. We check
the series price against the Riccati solve and a million Monte Carlo paths,
and show what the single-exponent time factor would give instead.
"""

import math

from ecirbond import (CoefficientFunction, ECIRModel, McConfig, PricingWindow, mc_price, price,
                      riccati_price, time_factor)

window = PricingWindow(0.8, 1.0)
model = ECIRModel(CoefficientFunction.const(1.0), CoefficientFunction.const(1.0), d=1, r0=0.5)
r_t = 0.5

series = price(window, model, N=4, r_t=r_t)
riccati = riccati_price(window, model, r_t)
print(f"series  N=4   {series.price:.10f}   (A0={series.A0:.8f}, A1={series.A1:.3e})")
print(f"riccati RK4   {riccati:.10f}")

mc = mc_price(window, model, r_t, McConfig(paths=200_000, steps=400))
print(f"monte carlo   {mc.mean:.6f} +- {mc.stderr:.1e}")

# The single-exponent time factor is noticeably off.
print("time factor, doubled:", time_factor(window, model))
print("time factor, single :", time_factor(window, model, "printed"))
alt = price(window, model, N=4, r_t=r_t, time_factor_convention="printed")
print(f"price with single exponent {alt.price:.6f} ({(alt.price - riccati) / mc.stderr:+.0f} MC stderr)")

# Without volatility everything collapses to a deterministic discount.
dead = ECIRModel(CoefficientFunction.const(1.0), CoefficientFunction.zero(), d=1, r0=0.5)
w0 = PricingWindow(0.0, 1.0)
print(price(w0, dead).price, math.exp(-0.5 * (1 - math.exp(-2)) / 2))
