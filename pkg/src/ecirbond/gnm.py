"""Pointwise evaluation of the polynomials G_n^m.

``G_n^m(s_1..s_n)`` is the coefficient of ``X_t^(2m) prod sigma(s_i)^2`` in
the frozen iterated derivative ``D^2_{s_n} ... D^2_{s_1} F``. It is computed
from the recurrences

* ``m = 0`` -- peel off the cycle through the highest active index ``h``:
  a self loop (``-2 k(h, h)``), or a cycle ``h -> i_1 -> ... -> i_k -> h``
  with weight ``(-1)^(k+1) 2^(2k+1)``;
* ``m >= 1`` -- peel off one open chain with both ends anchored at ``t``:
  ``4 k(t, i)^2`` for a single index, ``(-1)^(k+1) 2^(2k+5)`` for a chain
  ``i -> i_1 -> ... -> i_k -> j``; the sum over chains is divided by ``m``.

Interior indices ``i_1..i_k`` run over ordered sequences of distinct indices;
the chain end points ``{i, j}`` are unordered. This is the convention that
matches direct differentiation (see :mod:`ecirbond.symbolic`).

Kernels ``k(a, b)`` are ``T - max(a, b)`` for ``k == 0`` and the
double-exponential kernel ``kappa_tilde`` otherwise. The recursion only ever
deletes variables, so values are memoized per ``(subset mask, m)`` and are
vectorized over a batch of node tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .model import ECIRModel, drift_cache

DEFAULT_MAX_ORDER = 6


@dataclass(frozen=True)
class GnmConfig:
    """Order cap and the (non-sharp) constants of the G_n^m growth bound."""

    max_order: int = DEFAULT_MAX_ORDER
    alpha: float = 1.0
    beta: float = 9.0

    def __post_init__(self):
        if self.max_order < 0:
            raise ValueError("max_order must be >= 0")


DEFAULT_CONFIG = GnmConfig()


def max_order(config: GnmConfig | None = None) -> int:
    """Configured cap on ``n`` (default 6)."""
    return (config or DEFAULT_CONFIG).max_order


class GnmTable:
    """Memoized ``G^m`` over subsets of one batch of node tuples.

    ``pair[i][j]`` holds the kernel between variables ``i`` and ``j`` and
    ``anchor[i]`` the kernel between variable ``i`` and the valuation time,
    each an array over the batch.
    """

    def __init__(self, pair, anchor):
        self.pair = pair
        self.anchor = anchor
        self.n = len(anchor)
        self._memo: dict[tuple[int, int], np.ndarray | float] = {(0, 0): 1.0}

    @classmethod
    def from_nodes(cls, nodes: np.ndarray, t: float, T: float, model: ECIRModel | None = None):
        """Build kernels for node batch ``nodes`` of shape ``(P, n)``."""
        nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
        n = nodes.shape[1]
        if model is None or model.k.is_zero:
            def kern(a, b):
                return T - np.maximum(a, b)
        else:
            kern = drift_cache(model.k, float(T)).kappa_tilde
        cols = [nodes[:, i] for i in range(n)]
        pair = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                pair[i][j] = pair[j][i] = kern(cols[i], cols[j])
        tcol = np.full(nodes.shape[0], float(t))
        anchor = [kern(cols[i], tcol) for i in range(n)]
        return cls(pair, anchor)

    def value(self, mask: int, m: int):
        if m < 0 or m > mask.bit_count():
            return 0.0
        key = (mask, m)
        if key not in self._memo:
            self._memo[key] = self._cycle(mask) if m == 0 else self._chains(mask, m)
        return self._memo[key]

    def full(self, m: int):
        return self.value((1 << self.n) - 1, m)

    def _cycle(self, mask: int):
        pair = self.pair
        h = mask.bit_length() - 1
        rest = mask & ~(1 << h)
        total = -2.0 * pair[h][h] * self.value(rest, 0)

        def walk(cur, remaining, prod, k):
            nonlocal total
            bits = remaining
            while bits:
                low = bits & -bits
                i = low.bit_length() - 1
                bits ^= low
                step = prod * pair[cur][i]
                left = remaining & ~low
                coef = (-1.0) ** (k + 2) * 2.0 ** (2 * k + 3)
                total = total + coef * step * pair[i][h] * self.value(left, 0)
                if left:
                    walk(i, left, step, k + 1)

        walk(h, rest, 1.0, 0)
        return total

    def _chains(self, mask: int, m: int):
        pair, anchor = self.pair, self.anchor
        total = 0.0
        bits = mask
        while bits:
            low = bits & -bits
            i = low.bit_length() - 1
            bits ^= low
            total = total + 4.0 * anchor[i] ** 2 * self.value(mask & ~low, m - 1)

        def walk(start, cur, remaining, prod, k):
            # prod = anchor[start] * pair[start][i_1] * ... (up to cur)
            nonlocal total
            bits = remaining
            while bits:
                low = bits & -bits
                j = low.bit_length() - 1
                bits ^= low
                left = remaining & ~low
                step = prod * pair[cur][j]
                if j > start and left.bit_count() >= m - 1:
                    coef = (-1.0) ** (k + 1) * 2.0 ** (2 * k + 5)
                    total = total + coef * step * anchor[j] * self.value(left, m - 1)
                if left and left.bit_count() >= m:
                    walk(start, j, left, step, k + 1)

        bits = mask
        while bits:
            low = bits & -bits
            i = low.bit_length() - 1
            bits ^= low
            walk(i, i, mask & ~low, anchor[i], 0)
        return total / m


def _prepare(n: int, m: int, nodes, config: GnmConfig | None):
    cap = max_order(config)
    if n > cap:
        raise CapacityError(f"order n={n} exceeds the configured cap max_order={cap}")
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    arr = np.asarray(nodes, dtype=float)
    if n == 0:
        return arr.reshape(-1, 0) if arr.size else np.empty((1, 0)), arr.ndim > 1
    batched = arr.ndim == 2
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != n:
        raise ValueError(f"expected {n} nodes per tuple, got shape {np.shape(nodes)}")
    return arr, batched


def _finish(val, batch: int, batched: bool):
    out = np.broadcast_to(np.asarray(val, dtype=float), (batch,))
    return out.copy() if batched else float(out[0])


def g_const(n: int, m: int, nodes, T: float, config: GnmConfig | None = None):
    """``G_n^m`` for ``k == 0`` at ``nodes`` (shape ``(n,)`` or ``(P, n)``)."""
    arr, batched = _prepare(n, m, nodes, config)
    if m > n:
        return _finish(0.0, arr.shape[0], batched)
    table = GnmTable.from_nodes(arr, t=0.0, T=T) if n else GnmTable([], [])
    return _finish(table.full(m), arr.shape[0], batched)


def g_timedep(n: int, m: int, t: float, nodes, model: ECIRModel, T: float,
              config: GnmConfig | None = None):
    """``G_n^m(t, s_1..s_n)`` for a time-dependent drift, maturity ``T``."""
    arr, batched = _prepare(n, m, nodes, config)
    if m > n:
        return _finish(0.0, arr.shape[0], batched)
    table = GnmTable.from_nodes(arr, t=t, T=T, model=model) if n else GnmTable([], [])
    return _finish(table.full(m), arr.shape[0], batched)


def g_all(nodes: np.ndarray, t: float, T: float, model: ECIRModel | None, m_max: int) -> np.ndarray:
    """All ``G_n^m`` for ``m = 0..m_max`` at a batch; returns shape ``(P, m_max + 1)``."""
    nodes = np.asarray(nodes, dtype=float)
    P, n = nodes.shape
    if n == 0:
        out = np.zeros((P, m_max + 1))
        out[:, 0] = 1.0
        return out
    table = GnmTable.from_nodes(nodes, t, T, model)
    cols = [np.broadcast_to(np.asarray(table.full(m), dtype=float), (P,)) for m in range(m_max + 1)]
    return np.stack(cols, axis=1)
