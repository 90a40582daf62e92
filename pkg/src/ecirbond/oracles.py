"""Independent reference prices: Monte Carlo on the short-rate SDE and a
backward Runge-Kutta solve of the affine Riccati system."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ConfigError
from .model import ECIRModel, PricingWindow, drift_cache

SCHEMES = ("direct-sde", "ou-sum")
PATH_RULES = ("simpson", "trapezoid")
MAX_RICCATI_STEPS = 10_000_000


@dataclass(frozen=True)
class McConfig:
    paths: int = 1_000_000
    steps: int = 400
    seed: int = 20240521
    scheme: str = "ou-sum"
    chunk: int = 1 << 16
    workers: int = 1
    path_rule: str = "simpson"

    def __post_init__(self):
        if self.paths < 1 or self.steps < 1:
            raise ConfigError("mc.paths and mc.steps must be >= 1", field="mc")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}",
                              field="mc.scheme")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("mc.seed must be an unsigned 64-bit integer", field="mc.seed")
        if self.chunk < 1 or self.workers < 1:
            raise ConfigError("mc.chunk and mc.workers must be >= 1", field="mc")
        if self.path_rule not in PATH_RULES:
            raise ConfigError(f"unknown path rule {self.path_rule!r}; expected one of {PATH_RULES}",
                              field="mc.path_rule")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    paths: int


def _ou_step_coefficients(model: ECIRModel, grid: np.ndarray):
    """Decay factor and exact Gaussian std of one OU step on each grid cell."""
    x, w = np.polynomial.legendre.leggauss(8)
    a, b = grid[:-1, None], grid[1:, None]
    u = a + 0.5 * (b - a) * (x[None, :] + 1.0)
    sig2 = model.sigma(u) ** 2
    if model.k.is_zero:
        decay = np.ones(len(grid) - 1)
        var = 0.5 * (grid[1:] - grid[:-1]) * (sig2 @ w)
    else:
        cache = drift_cache(model.k, float(grid[-1]))
        K = cache.K(grid)
        decay = np.exp(-(K[1:] - K[:-1]))
        var = 0.5 * (grid[1:] - grid[:-1]) * ((np.exp(-2.0 * (K[1:, None] - cache.K(u))) * sig2) @ w)
    return decay, np.sqrt(var)


def path_weights(steps: int, rule: str = "simpson") -> np.ndarray:
    """Weights (in units of the step) for ``int r ds`` over ``steps + 1`` grid values.

    ``simpson`` is composite Simpson, closing with the 3/8 rule on the last
    three cells when ``steps`` is odd; a single step falls back to trapezoid.
    """
    w = np.zeros(steps + 1)
    if rule == "trapezoid" or steps == 1:
        w[:] = 1.0
        w[0] = w[-1] = 0.5
        return w
    even = steps if steps % 2 == 0 else steps - 3
    if even:
        w[:even + 1:2] = 2.0 / 3.0
        w[1:even:2] = 4.0 / 3.0
        w[0] = w[even] = 1.0 / 3.0
    if even != steps:
        w[even:] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    return w


def _simulate_chunk(lo, hi, window, model, r_start, cfg, out):
    h = window.tau / cfg.steps
    grid = window.t + h * np.arange(cfg.steps + 1)
    keys = rng.path_keys(cfg.seed, np.arange(lo, hi, dtype=np.uint64))
    count = hi - lo
    weights = path_weights(cfg.steps, cfg.path_rule)
    if cfg.scheme == "direct-sde":
        sig = model.sigma(grid[:-1])
        kk = model.k(grid[:-1])
        r = np.full(count, float(r_start))
        acc = weights[0] * r
        sqrt_h = math.sqrt(h)
        for j in range(cfg.steps):
            rp = np.maximum(r, 0.0)
            dW = sqrt_h * rng.normals(keys, j)
            r = r + (model.d * sig[j] ** 2 - 2.0 * kk[j] * rp) * h + 2.0 * sig[j] * np.sqrt(rp) * dW
            acc += weights[j + 1] * np.maximum(r, 0.0)
    else:
        decay, std = _ou_step_coefficients(model, grid)
        d = model.d
        X = np.full((d, count), math.sqrt(r_start / d))
        acc = weights[0] * np.sum(X * X, axis=0)
        for j in range(cfg.steps):
            for i in range(d):
                X[i] = decay[j] * X[i] + std[j] * rng.normals(keys, j * d + i)
            acc += weights[j + 1] * np.sum(X * X, axis=0)
    out[lo:hi] = np.exp(-h * acc)


def mc_payoffs(window: PricingWindow, model: ECIRModel, r_start: float, cfg: McConfig) -> np.ndarray:
    """Per-path discount factors ``exp(-int_t^T r ds)`` (path rule from ``cfg``)."""
    if not r_start >= 0:
        raise ConfigError(f"r_start must be >= 0, got {r_start}", field="r_start")
    out = np.empty(cfg.paths)
    if window.tau == 0:
        out.fill(1.0)
        return out
    bounds = [(lo, min(lo + cfg.chunk, cfg.paths)) for lo in range(0, cfg.paths, cfg.chunk)]
    if cfg.workers == 1:
        for lo, hi in bounds:
            _simulate_chunk(lo, hi, window, model, r_start, cfg, out)
    else:
        with ThreadPoolExecutor(cfg.workers) as pool:
            list(pool.map(lambda b: _simulate_chunk(*b, window, model, r_start, cfg, out), bounds))
    return out


def mc_price(window: PricingWindow, model: ECIRModel, r_start: float, cfg: McConfig) -> McEstimate:
    """Monte Carlo bond price started from ``r_start`` at time ``t``.

    ``direct-sde`` is full-truncation Euler on the square-root SDE;
    ``ou-sum`` evolves ``d`` OU components with exact Gaussian steps and sums
    their squares. The time integral of ``r`` uses composite Simpson by
    default (``path_rule="trapezoid"`` is available); results do not depend on
    ``chunk`` or ``workers``.
    """
    pay = mc_payoffs(window, model, r_start, cfg)
    n = len(pay)
    mean = math.fsum(pay) / n
    if n < 2:
        return McEstimate(mean, math.nan, n)
    var = math.fsum((pay - mean) ** 2) / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


@dataclass(frozen=True)
class RiccatiSolution:
    """``B(s, T)`` and ``A(s, T)`` on the grid ``times`` (ascending, ending at T)."""

    times: np.ndarray
    B: np.ndarray
    A: np.ndarray
    h: float

    def price(self, r_t: float) -> float:
        return float(self.A[0] * math.exp(-self.B[0] * r_t))


def _add(total: float, x: float, comp: float) -> tuple[float, float]:
    """Neumaier step: returns the rounded sum and the updated compensation."""
    t = total + x
    if abs(total) >= abs(x):
        comp += (total - t) + x
    else:
        comp += (x - t) + total
    return t + comp, comp - ((t + comp) - t)


def riccati_solve(window: PricingWindow, model: ECIRModel, h: float | None = None,
                  convention: str = "doubled") -> RiccatiSolution:
    """Classic RK4 backward from ``T`` for the affine exponents.

    ``"doubled"``: ``B' = 2 k B + 2 sigma^2 B^2 - 1``, ``(ln A)' = d sigma^2 B``.
    ``"printed"``: ``B' = k B + sigma^2 B^2 / 2 - 1``, ``(ln A)' = d sigma^2 B / 2``.
    Terminal values ``B(T) = 0``, ``A(T) = 1``. ``h`` defaults to ``tau / 1000``.
    """
    tau = window.tau
    if tau == 0:
        return RiccatiSolution(np.array([window.T]), np.zeros(1), np.ones(1), 0.0)
    if h is None:
        h = tau / 1000
    if not h > 0 or h > tau * (1 + 1e-12):
        raise ConfigError(f"riccati step h must satisfy 0 < h <= tau, got {h}", field="riccati.h")
    steps = math.ceil(tau / h - 1e-9)
    if steps > MAX_RICCATI_STEPS:
        raise ConfigError(f"riccati step h={h} underflows: {steps} steps exceed {MAX_RICCATI_STEPS}",
                          field="riccati.h")
    if convention == "doubled":
        ck, cs, ca = 2.0, 2.0, 1.0
    elif convention == "printed":
        ck, cs, ca = 1.0, 0.5, 0.5
    else:
        raise ConfigError(f"unknown riccati convention {convention!r}", field="riccati.convention")
    k, sigma, d = model.k, model.sigma, model.d

    def rhs(s, B):
        sg2 = sigma(s) ** 2
        return ck * k(s) * B + cs * sg2 * B * B - 1.0, ca * d * sg2 * B

    hh = tau / steps
    times = window.T - hh * np.arange(steps + 1)
    B = np.zeros(steps + 1)
    lnA = np.zeros(steps + 1)
    cb = ca_ = 0.0  # compensation terms (Neumaier) for the long running sums
    for j in range(steps):
        s, b, la = times[j], B[j], lnA[j]
        # stepping backward: y(s - hh) = y(s) - hh * y'
        k1 = rhs(s, b)
        k2 = rhs(s - 0.5 * hh, b - 0.5 * hh * k1[0])
        k3 = rhs(s - 0.5 * hh, b - 0.5 * hh * k2[0])
        k4 = rhs(s - hh, b - hh * k3[0])
        B[j + 1], cb = _add(b, -hh / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]), cb)
        lnA[j + 1], ca_ = _add(la, -hh / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]), ca_)
    return RiccatiSolution(times[::-1].copy(), B[::-1].copy(), np.exp(lnA[::-1]), hh)


def riccati_price(window: PricingWindow, model: ECIRModel, r_t: float, h: float | None = None,
                  convention: str = "doubled") -> float:
    return riccati_solve(window, model, h, convention).price(r_t)
