"""
The G_n^m polynomials, two ways
===============================

The series coefficients are integrals of G_n^m. The engine evaluates them with
a memoized graph recurrence; here we compare against brute-force symbolic
differentiation of the discount functional, term by term.
"""

import numpy as np

from ecirbond import CoefficientFunction, ECIRModel, differentiate, freeze_and_collect, g_const, g_timedep
from ecirbond.symbolic import classify, dump_terms

# Second-order expansion: six terms, each a product of first and second
# derivatives of Y = -int r.
print(dump_terms(2))

# A few values with k = 0 on [0.8, 1].
print("G_1^0(0.8)      =", g_const(1, 0, [0.8], 1.0))
print("G_1^1(0.8)      =", g_const(1, 1, [0.8], 1.0))
print("G_2^0(0.8, 0.9) =", g_const(2, 0, [0.8, 0.9], 1.0))
print("G_2^2(0.8, 0.9) =", g_const(2, 2, [0.8, 0.9], 1.0))

# Now a mean-reverting drift k = 1 and 500 random node triples.
T, t = 1.0, 0.8
model = ECIRModel(CoefficientFunction.const(1.0), CoefficientFunction.const(1.0), 1, 0.5)
nodes = np.random.default_rng(0).uniform(t, T, (500, 3))
brute = freeze_and_collect(differentiate(3), t, T, nodes, model)
for m in range(4):
    fast = g_timedep(3, m, t, nodes, model, T)
    err = np.max(np.abs(fast - brute[:, m]) / np.abs(brute[:, m]))
    print(f"n=3 m={m}: max relative difference {err:.1e}")

# Each generated term is one of five block shapes; the 3-cycle shows up
# first at third order with coefficient 2^3.
for term in differentiate(3):
    shape = classify(term)
    if shape.cases().get(4):
        print("3-cycle:", term)
