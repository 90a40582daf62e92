"""Series coefficients A_m(t, T) and the resulting zero-coupon bond price.

    A_m = sum_{n >= m} B_n^m,
    B_n^m = 1 / (2^n n!) int_{[t,T]^n} G_n^m(s) prod_j sigma(s_j)^2 ds.

Only ``A_0`` and ``A_1`` enter the price,

    P(t, T) = A_0^d exp(-(c(t, T) - A_1 / A_0) r_t),

where ``c`` is the deterministic time factor (``T - t`` when ``k == 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gnm
from .errors import CapacityError, ConfigError, SeriesDivergenceError
from .model import ECIRModel, PricingWindow, time_factor
from .quadrature import DEFAULT_BUDGET, DEFAULT_Q, evaluation_count, integrate_hypercube

DEFAULT_N = 4
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SeriesCoefficients:
    """Truncated ``A_0..A_M`` with per-term magnitudes and diagnostics.

    ``terms[(n, m)]`` is ``B_n^m``; ``orders[m]`` is the last ``n`` included
    in ``A_m``; ``tail_bounds[m]`` is the analytic tail estimate beyond it.
    """

    values: tuple
    terms: dict
    orders: tuple
    tail_bounds: tuple
    q: int
    mode: str
    quadrature_gaps: dict = field(default_factory=dict)

    def __getitem__(self, m: int) -> float:
        return self.values[m]

    def partial(self, m: int, N: int) -> float:
        """``A_m`` truncated after ``n = N`` (using the stored terms)."""
        return math.fsum(v for (n, mm), v in self.terms.items() if mm == m and n <= N)


@dataclass(frozen=True)
class BondPrice:
    price: float
    A: float          # A_0^d
    B: float          # time factor - A_1 / A_0
    A0: float
    A1: float
    r_t: float
    N: int
    q: int
    tail_bound: float


def _integrand(window: PricingWindow, model: ECIRModel, m_max: int):
    use_k = not model.k.is_zero

    def f(nodes):
        g = gnm.g_all(nodes, window.t, window.T, model if use_k else None, m_max)
        if nodes.shape[1]:
            g = g * np.prod(model.sigma(nodes) ** 2, axis=1)[:, None]
        return g

    return f


def series_coefficients(window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N,
                        q: int = DEFAULT_Q, m_max: int = 1, tol: float = DEFAULT_TOL,
                        mode: str = "simplex", config: gnm.GnmConfig | None = None,
                        budget: int = DEFAULT_BUDGET, diagnostics: bool = False) -> SeriesCoefficients:
    """Compute ``A_0..A_{m_max}`` truncated at ``n <= N``.

    Adding terms for ``A_m`` stops early once ``|B_n^m| < tol |A_m|`` with
    ``n >= m + 1`` (``tol=0`` disables early stopping).
    """
    config = config or gnm.DEFAULT_CONFIG
    cap = gnm.max_order(config)
    if N > cap:
        raise CapacityError(f"truncation N={N} exceeds the configured cap max_order={cap}")
    if m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max}")
    for n in range(N + 1):
        if evaluation_count(n, q, mode) > budget:
            raise CapacityError(f"{evaluation_count(n, q, mode)} integrand evaluations at n={n} "
                                f"exceed the evaluation budget of {budget}")

    sums = [0.0] * (m_max + 1)
    orders = [N] * (m_max + 1)
    active = [True] * (m_max + 1)
    terms: dict = {}
    gaps: dict = {}
    f = _integrand(window, model, m_max)
    for n in range(N + 1):
        if not any(active):
            break
        scale = 1.0 / (2.0 ** n * math.factorial(n))
        if window.tau == 0 and n > 0:
            vals = np.zeros(m_max + 1)
        else:
            vals = scale * integrate_hypercube(n, f, window.t, window.T, q, mode, budget)
            if diagnostics and n > 0:
                finer = scale * integrate_hypercube(n, f, window.t, window.T, q + 2, mode, budget)
                for m in range(min(n, m_max) + 1):
                    gaps[(n, m)] = abs(finer[m] - vals[m])
        for m in range(min(n, m_max) + 1):
            if not active[m]:
                continue
            b = float(vals[m])
            terms[(n, m)] = b
            sums[m] = math.fsum([sums[m], b])
            orders[m] = n
            if tol > 0 and n >= m + 1 and abs(b) < tol * abs(sums[m]):
                active[m] = False

    tails = tuple(truncation_bound(orders[m], m, window, model, config.alpha, config.beta)
                  for m in range(m_max + 1))
    return SeriesCoefficients(tuple(sums), terms, tuple(orders), tails, q, mode, gaps)


def compute_A(m: int, window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N,
              q: int = DEFAULT_Q, **kwargs) -> float:
    """Truncated series coefficient ``A_m(t, T)``."""
    if not 0 <= m <= N:
        raise ValueError(f"need 0 <= m <= N, got m={m}, N={N}")
    return series_coefficients(window, model, N, q, m_max=m, **kwargs)[m]


def _resolve_rate(window: PricingWindow, model: ECIRModel, r_t):
    if r_t is None:
        if window.t != 0:
            raise ConfigError("r_t must be supplied when pricing at t > 0", field="r_t")
        return model.r0
    if not (math.isfinite(r_t) and r_t >= 0):
        raise ConfigError(f"r_t must be finite and >= 0, got {r_t}", field="r_t")
    return float(r_t)


def _assemble(coeffs: SeriesCoefficients, window, model, r_t, N, q, factor) -> BondPrice:
    A0, A1 = coeffs[0], coeffs[1]
    if not A0 > 0:
        raise SeriesDivergenceError(
            f"A_0 = {A0:.6g} <= 0 at truncation N={N}: tau={window.tau} is outside the "
            f"convergence domain (tail bound {coeffs.tail_bounds[0]:.3g})")
    B = factor - A1 / A0
    A = A0 ** model.d
    price = A * math.exp(-B * r_t)
    return BondPrice(price, A, B, A0, A1, r_t, N, q, max(coeffs.tail_bounds))


def price_const_k(window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N, q: int = DEFAULT_Q,
                  r_t: float | None = None, **kwargs) -> BondPrice:
    """Bond price for ``k == 0``: ``A_0^d exp(-(T - t - A_1/A_0) r_t)``."""
    if not model.k.is_zero:
        raise ConfigError("price_const_k requires k == 0; use price_timedep", field="model.k")
    r = _resolve_rate(window, model, r_t)
    if window.tau == 0:
        return BondPrice(1.0, 1.0, 0.0, 1.0, 0.0, r, N, q, 0.0)
    coeffs = series_coefficients(window, model, N, q, m_max=1, **kwargs)
    return _assemble(coeffs, window, model, r, N, q, window.tau)


def price_timedep(window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N, q: int = DEFAULT_Q,
                  r_t: float | None = None, time_factor_convention: str = "doubled",
                  **kwargs) -> BondPrice:
    """Bond price for a time-dependent drift.

    ``A_0^d exp(-(c(t, T) - A_1/A_0) r_t)`` with ``c`` from
    :func:`ecirbond.model.time_factor` (``"doubled"`` by default).
    """
    r = _resolve_rate(window, model, r_t)
    if window.tau == 0:
        return BondPrice(1.0, 1.0, 0.0, 1.0, 0.0, r, N, q, 0.0)
    factor = time_factor(window, model, time_factor_convention)
    coeffs = series_coefficients(window, model, N, q, m_max=1, **kwargs)
    return _assemble(coeffs, window, model, r, N, q, factor)


def price(window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N, q: int = DEFAULT_Q,
          r_t: float | None = None, time_factor_convention: str = "doubled", **kwargs) -> BondPrice:
    """Dispatch to :func:`price_const_k` (``k == 0``) or :func:`price_timedep`."""
    if model.k.is_zero:
        return price_const_k(window, model, N, q, r_t, **kwargs)
    return price_timedep(window, model, N, q, r_t, time_factor_convention, **kwargs)


def riccati_from_series(window: PricingWindow, model: ECIRModel, N: int = DEFAULT_N,
                        q: int = DEFAULT_Q, **kwargs) -> tuple[float, float]:
    """Affine pair ``(A, B)`` with ``P = A exp(-B r_t)``."""
    if window.tau == 0:
        return 1.0, 0.0
    factor = time_factor(window, model, kwargs.pop("time_factor_convention", "doubled"))
    coeffs = series_coefficients(window, model, N, q, m_max=1, **kwargs)
    p = _assemble(coeffs, window, model, 0.0, N, q, factor)
    return p.A, p.B


def truncation_bound(N: int, m: int, window: PricingWindow, model: ECIRModel,
                     alpha: float = 1.0, beta: float = 9.0) -> float:
    """Tail estimate for ``sum_{n > N} |B_n^m|`` from the growth bound on G_n^m.

    With ``M`` the volatility bound and ``rho = (4 + beta) M^2 tau^2 / 2``::

        tail <= alpha / m! (8 / beta)^m tau^m rho^(N+1) / (1 - rho)

    Returns ``inf`` when ``rho >= 1`` (the bound says nothing there).
    """
    if not beta > 2:
        raise ValueError(f"beta must exceed 2, got {beta}")
    if not alpha >= 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    tau = window.tau
    if tau == 0:
        return 0.0
    M = model.sigma.bound
    rho = (4.0 + beta) * M * M * tau * tau / 2.0
    if rho >= 1.0:
        return math.inf
    lead = alpha / math.factorial(m) * (8.0 / beta) ** m * tau ** m
    return lead * rho ** (N + 1) / (1.0 - rho)
