import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ecirbond.errors import CapacityError, QuadratureError
from ecirbond.quadrature import (QuadratureRule, TensorGrid, convergence_gap, evaluation_count,
                                 hypercube_points, integrate_1d, integrate_hypercube)


def test_one_dimensional_examples():
    assert integrate_1d(lambda s: np.ones_like(s), 0.0, 1.0, q=4) == 1.0
    assert integrate_1d(lambda s: 1 - s, 0.8, 1.0, q=4) == pytest.approx(0.02, abs=1e-16)
    assert integrate_1d(lambda s: (1 - s) ** 2, 0.8, 1.0, q=4) == pytest.approx(0.2 ** 3 / 3, rel=1e-14)
    assert integrate_1d(np.sin, 1.0, 1.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.data())
def test_polynomial_exactness(q, data):
    coeffs = data.draw(st.lists(st.floats(-3, 3), min_size=2 * q, max_size=2 * q))
    a = data.draw(st.floats(-1, 1))
    b = a + data.draw(st.floats(0.01, 2))
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(b) - poly.integ()(a)
    got = integrate_1d(poly, a, b, q)
    scale = sum(abs(c) for c in coeffs) * max(1.0, abs(a), abs(b)) ** (2 * q) * (b - a) + 1.0
    assert abs(got - exact) <= 1e-12 * scale


def test_rule_weights_sum_to_length():
    nodes, weights = QuadratureRule(8).mapped(0.8, 1.0)
    assert math.fsum(weights) == pytest.approx(0.2, abs=1e-15)
    assert np.all((nodes > 0.8) & (nodes < 1.0))
    with pytest.raises(ValueError):
        QuadratureRule(0)


def test_tensor_grid_size():
    g = TensorGrid(3, 4, 0.0, 1.0)
    pts, w = g.points()
    assert g.size == 64 and pts.shape == (64, 3)
    assert math.fsum(w) == pytest.approx(1.0)


def test_product_example():
    f = lambda x: np.prod(1.0 - x, axis=1)  # noqa: E731
    for mode in ("full", "symmetric", "simplex"):
        assert integrate_hypercube(2, f, 0.8, 1.0, q=4, mode=mode) == pytest.approx(4e-4, rel=1e-12)


def test_first_correction_in_A0():
    f = lambda x: -2.0 * (1.0 - x[:, 0])  # noqa: E731
    val = integrate_hypercube(1, f, 0.8, 1.0, q=4)
    assert val == pytest.approx(-0.04, rel=1e-14)
    assert val / 2 == pytest.approx(-0.02, rel=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_modes_agree_on_symmetric_integrand(n):
    f = lambda x: np.exp(-np.sum(x, axis=1)) * np.prod(np.cos(x), axis=1)  # noqa: E731
    full = integrate_hypercube(n, f, 0.2, 1.0, q=8, mode="full")
    sym = integrate_hypercube(n, f, 0.2, 1.0, q=8, mode="symmetric")
    simp = integrate_hypercube(n, f, 0.2, 1.0, q=10, mode="simplex")
    assert sym == pytest.approx(full, rel=1e-13)
    assert simp == pytest.approx(full, rel=1e-10)


def test_simplex_handles_max_kinks():
    # int_{[0,1]^2} (1 - max(x, y)) = 1/3, kinked along the diagonal
    f = lambda x: 1.0 - np.max(x, axis=1)  # noqa: E731
    assert integrate_hypercube(2, f, 0.0, 1.0, q=4, mode="simplex") == pytest.approx(1 / 3, abs=1e-15)
    assert abs(integrate_hypercube(2, f, 0.0, 1.0, q=4, mode="full") - 1 / 3) > 1e-6


def test_vector_valued_integrand():
    f = lambda x: np.stack([np.ones(len(x)), x[:, 0] * x[:, 1]], axis=1)  # noqa: E731
    out = integrate_hypercube(2, f, 0.0, 1.0, q=3)
    np.testing.assert_allclose(out, [1.0, 0.25], rtol=1e-14)


def test_chunking_does_not_change_result():
    f = lambda x: np.sin(np.sum(x, axis=1))  # noqa: E731
    a = integrate_hypercube(3, f, 0.0, 1.0, q=6, chunk=7)
    b = integrate_hypercube(3, f, 0.0, 1.0, q=6, chunk=100000)
    assert a == b


def test_budget_and_errors():
    assert evaluation_count(6, 8, "full") == 8 ** 6
    with pytest.raises(CapacityError, match="budget of 100"):
        integrate_hypercube(3, lambda x: x[:, 0], 0.0, 1.0, q=8, budget=100)
    with pytest.raises(QuadratureError) as err:
        with np.errstate(divide="ignore"):
            integrate_1d(lambda s: 1.0 / (s - s.min()), 0.0, 1.0)
    assert err.value.node is not None
    with pytest.raises(ValueError):
        hypercube_points(2, 4, 0.0, 1.0, mode="sparse")


def test_zero_dimension_and_gap():
    assert integrate_hypercube(0, lambda x: np.full(len(x), 2.5), 0.0, 1.0) == 2.5
    gap = convergence_gap(2, lambda x: np.exp(np.sum(x, axis=1)), 0.0, 1.0, q=4)
    assert 0 <= gap < 1e-6
