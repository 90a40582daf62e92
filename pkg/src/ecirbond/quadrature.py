"""Gauss-Legendre rules in one dimension and on hypercubes ``[t, T]^n``.

Three hypercube modes are offered:

``"full"``
    plain tensor product, ``q^n`` evaluations;
``"symmetric"``
    tensor product restricted to sorted multi-indices with multinomial
    weights (valid for symmetric integrands);
``"simplex"``
    ``n!`` times a collapsed-coordinate (Duffy) rule on the ordered simplex
    ``t <= s_1 <= ... <= s_n <= T``. For symmetric integrands built from
    ``max(s_i, s_j)`` kernels this removes the diagonal kinks, so polynomial
    integrands are integrated exactly.

Reductions use ``math.fsum`` so results do not depend on chunking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, QuadratureError

DEFAULT_Q = 8
DEFAULT_BUDGET = 10_000_000
MODES = ("full", "symmetric", "simplex")


@lru_cache(maxsize=None)
def _leggauss(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    # enforce exact symmetry and push the rounding residual of sum(w) = 2
    # into the central weight(s) so that constants integrate exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    mid = [q // 2] if q % 2 else [q // 2 - 1, q // 2]
    for _ in range(4):
        resid = 2.0 - math.fsum(w)
        for j in mid:
            w[j] += resid / len(mid)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights of order ``q`` on ``[-1, 1]``."""

    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"quadrature order must be >= 1, got {self.q}")

    @property
    def nodes(self) -> np.ndarray:
        return _leggauss(self.q)[0]

    @property
    def weights(self) -> np.ndarray:
        return _leggauss(self.q)[1]

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@dataclass(frozen=True)
class TensorGrid:
    """``n``-fold product of a 1-D rule mapped to ``[t, T]``."""

    n: int
    q: int
    t: float
    T: float

    def multi_indices(self):
        return itertools.product(range(self.q), repeat=self.n)

    @property
    def size(self) -> int:
        return self.q ** self.n

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = QuadratureRule(self.q).mapped(self.t, self.T)
        if self.n == 0:
            return np.empty((1, 0)), np.ones(1)
        mesh = np.meshgrid(*([x] * self.n), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*([w] * self.n), indexing="ij")
        wts = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        return pts, wts


def _check_finite(values: np.ndarray, pts) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.argwhere(bad)[0][0]
        node = pts[idx] if pts is not None else None
        raise QuadratureError(f"integrand is not finite at node {node!r}", node=node)


def integrate_1d(f, a: float, b: float, q: int = DEFAULT_Q) -> float:
    """Gauss-Legendre approximation of ``int_a^b f``; exact for degree <= 2q-1."""
    if a > b:
        raise ValueError(f"integrate_1d needs a <= b, got [{a}, {b}]")
    x, w = QuadratureRule(q).mapped(a, b)
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    _check_finite(vals, x)
    return math.fsum(vals * w)


def simplex_points(n: int, q: int, t: float, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on ``{t <= s_1 <= ... <= s_n <= T}`` (weights sum to tau^n / n!)."""
    if n == 0:
        return np.empty((0 + 1, 0)), np.ones(1)
    x, w = QuadratureRule(q).mapped(0.0, 1.0)
    mesh = np.meshgrid(*([x] * n), indexing="ij")
    u = np.stack([m.ravel() for m in mesh], axis=-1)
    wmesh = np.meshgrid(*([w] * n), indexing="ij")
    wu = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    tau = T - t
    # s_i = t + tau * prod_{j >= i} u_j ; Jacobian tau^n prod_i u_i^(i-1)
    cum = np.cumprod(u[:, ::-1], axis=1)[:, ::-1]
    pts = t + tau * cum
    jac = tau ** n * np.prod(u ** np.arange(n)[None, :], axis=1)
    return pts, wu * jac


def symmetric_points(n: int, q: int, t: float, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Sorted multi-indices of the tensor grid with multinomial weights."""
    x, w = QuadratureRule(q).mapped(t, T)
    if n == 0:
        return np.empty((1, 0)), np.ones(1)
    idx = np.array(list(itertools.combinations_with_replacement(range(q), n)), dtype=int)
    pts = x[idx]
    wts = np.prod(w[idx], axis=1)
    fact_n = math.factorial(n)
    mult = np.array([fact_n // math.prod(math.factorial(c) for c in np.bincount(row).tolist())
                     for row in idx], dtype=float)
    return pts, wts * mult


def hypercube_points(n: int, q: int, t: float, T: float, mode: str = "full"):
    """Points and weights such that ``sum w f(p)`` approximates ``int_{[t,T]^n} f``."""
    if mode == "full":
        return TensorGrid(n, q, t, T).points()
    if mode == "symmetric":
        return symmetric_points(n, q, t, T)
    if mode == "simplex":
        pts, wts = simplex_points(n, q, t, T)
        return pts, wts * math.factorial(n)
    raise ValueError(f"unknown quadrature mode {mode!r}; expected one of {MODES}")


def evaluation_count(n: int, q: int, mode: str = "full") -> int:
    if mode == "symmetric":
        return math.comb(q + n - 1, n)
    return q ** n


def integrate_hypercube(n: int, f, t: float, T: float, q: int = DEFAULT_Q, mode: str = "full",
                        budget: int = DEFAULT_BUDGET, chunk: int = 1 << 15):
    """Integrate ``f`` over ``[t, T]^n``.

    ``f`` maps an ``(P, n)`` array of node tuples to ``(P,)`` or ``(P, M)``
    values; vector-valued integrands return an ``(M,)`` array. ``"symmetric"``
    and ``"simplex"`` modes assume ``f`` is symmetric in its arguments.
    """
    if t > T:
        raise ValueError(f"integrate_hypercube needs t <= T, got [{t}, {T}]")
    count = evaluation_count(n, q, mode)
    if count > budget:
        raise CapacityError(f"{count} integrand evaluations exceed the evaluation budget of {budget}")
    pts, wts = hypercube_points(n, q, t, T, mode)
    parts = []
    for lo in range(0, len(wts), chunk):
        p = pts[lo:lo + chunk]
        vals = np.asarray(f(p), dtype=float)
        if vals.ndim == 0:
            vals = np.full(len(p), float(vals))
        _check_finite(vals, p)
        parts.append(vals * (wts[lo:lo + chunk] if vals.ndim == 1 else wts[lo:lo + chunk, None]))
    prod = np.concatenate(parts, axis=0)
    if prod.ndim == 1:
        return math.fsum(prod)
    return np.array([math.fsum(col) for col in prod.T])


def convergence_gap(n: int, f, t: float, T: float, q: int = DEFAULT_Q, mode: str = "full",
                    budget: int = DEFAULT_BUDGET):
    """``|I(q) - I(q+2)|``, the per-term quadrature diagnostic."""
    a = integrate_hypercube(n, f, t, T, q, mode, budget)
    b = integrate_hypercube(n, f, t, T, q + 2, mode, budget)
    return np.abs(np.asarray(b) - np.asarray(a)) if np.ndim(a) else abs(b - a)
