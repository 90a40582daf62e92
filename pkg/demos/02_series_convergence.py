"""
Convergence of the series for constant volatility
==================================================

With k = 0 and sigma = 1 the affine exponent has the closed form
B = tanh(sqrt(2) tau) / sqrt(2). Truncating the series after N terms should
close the gap geometrically in tau^2.
"""

import math

from ecirbond import (CoefficientFunction, ECIRModel, PricingWindow, riccati_from_series,
                      series_coefficients, truncation_bound)

window = PricingWindow(0.8, 1.0)
model = ECIRModel(CoefficientFunction.zero(), CoefficientFunction.const(1.0), d=1, r0=0.5)
exact = math.tanh(math.sqrt(2) * window.tau) / math.sqrt(2)

print(" N   B(N)                gap        proven tail bound")
for N in range(1, 7):
    A, B = riccati_from_series(window, model, N=N, tol=0)
    bound = truncation_bound(N, 1, window, model)
    print(f"{N:2d}   {B:.15f}   {B - exact:+.1e}   {bound:.1e}")

# The individual terms B_n^m shrink roughly like (tau^2 / 2)^n.
coeffs = series_coefficients(window, model, N=5, m_max=2, tol=0)
for (n, m), value in sorted(coeffs.terms.items()):
    print(f"B_{n}^{m} = {value:+.3e}")

# Coefficients satisfy (m+1) A_0 A_{m+1} = A_1 A_m; for m = 1:
print("2 A0 A2 - A1^2 =", 2 * coeffs[0] * coeffs[2] - coeffs[1] ** 2)
