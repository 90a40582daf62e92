"""Extended CIR model: coefficients, pricing window and the drift kernel.

The short rate follows

    dr = (d sigma(s)^2 - 2 k(s) r) ds + 2 sigma(s) sqrt(r) dW,

with integer dimension ``d``, so that ``r = sum_i (X_i)^2`` for ``d``
independent Ornstein-Uhlenbeck processes ``dX = -k X ds + sigma dW``. The
mean-reversion level ``theta = d sigma^2 / (2k)`` is derived, never stored,
which keeps ``k == 0`` well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import expression
from .errors import CoefficientError, ConfigError

PRESETS = ("zero", "const", "linear_decay", "exp_decay", "sin")

_BOUND_SAMPLES = 4097


@dataclass(frozen=True, eq=False)
class CoefficientFunction:
    """A deterministic coefficient ``s -> value`` on ``[0, horizon]``.

    ``bound`` is a uniform bound of ``|value|`` on the horizon (used only by
    the truncation estimate). ``constant`` is set when the function is known
    to be constant, which lets callers take the ``k == 0`` fast paths.
    """

    kind: str
    func: Callable[[np.ndarray], np.ndarray]
    bound: float
    horizon: float
    constant: float | None = None

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        if self.constant is not None:
            out = np.full(s_arr.shape, self.constant)
        else:
            out = np.asarray(self.func(s_arr), dtype=float)
        return out if out.ndim else float(out)

    evaluate = __call__

    @property
    def is_zero(self) -> bool:
        return self.constant == 0.0

    @classmethod
    def const(cls, value: float, horizon: float = 1.0) -> "CoefficientFunction":
        value = float(value)
        if not math.isfinite(value):
            raise CoefficientError(f"constant coefficient must be finite, got {value}")
        return cls(f"const:{value!r}", lambda s: np.full(np.shape(s), value), abs(value),
                   horizon, constant=value)

    @classmethod
    def zero(cls, horizon: float = 1.0) -> "CoefficientFunction":
        return cls.const(0.0, horizon)

    @classmethod
    def from_callable(cls, func, horizon: float, kind: str = "callable") -> "CoefficientFunction":
        bound = _checked_bound(func, horizon, kind)
        return cls(kind, func, bound, horizon)

    @classmethod
    def from_expression(cls, text: str, horizon: float) -> "CoefficientFunction":
        func = expression.compile_expression(text)
        tree = func.tree
        if not expression.depends_on_s(tree):
            return cls.const(float(expression.evaluate(tree, 0.0)), horizon)
        return cls(expression.render(tree), func, _checked_bound(func, horizon, text), horizon)

    @classmethod
    def preset(cls, name: str, horizon: float, value: float | None = None) -> "CoefficientFunction":
        """Named coefficients: ``zero``, ``const``, ``linear_decay`` (horizon - s),
        ``exp_decay`` (exp(-s)) and ``sin``."""
        if name == "zero":
            return cls.zero(horizon)
        if name == "const":
            if value is None:
                raise ConfigError("preset 'const' needs a value, e.g. const:1")
            return cls.const(value, horizon)
        if value is not None:
            raise ConfigError(f"preset {name!r} takes no value")
        if name == "linear_decay":
            T = float(horizon)
            func = lambda s: T - np.asarray(s, dtype=float)  # noqa: E731
        elif name == "exp_decay":
            func = lambda s: np.exp(-np.asarray(s, dtype=float))  # noqa: E731
        elif name == "sin":
            func = lambda s: np.sin(np.asarray(s, dtype=float))  # noqa: E731
        else:
            raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
        return cls(name, func, _checked_bound(func, horizon, name), horizon)

    @classmethod
    def parse(cls, spec: str, horizon: float) -> "CoefficientFunction":
        """Build from config text: a preset (``sin``, ``const:0.3``) or an expression."""
        spec = spec.strip()
        name, _, arg = spec.partition(":")
        if name in PRESETS:
            value = None
            if arg:
                try:
                    value = float(arg)
                except ValueError:
                    raise ConfigError(f"bad preset value {arg!r}", code="type") from None
            return cls.preset(name, horizon, value)
        return cls.from_expression(spec, horizon)


def _checked_bound(func, horizon: float, label: str) -> float:
    grid = np.linspace(0.0, horizon, _BOUND_SAMPLES)
    vals = np.asarray(func(grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = grid[~np.isfinite(np.broadcast_to(vals, grid.shape))][0]
        raise CoefficientError(f"coefficient {label!r} is not finite at s={bad!r}")
    return float(np.max(np.abs(vals)))


@dataclass(frozen=True, eq=False)
class ECIRModel:
    """Drift rate ``k``, volatility ``sigma``, integer dimension ``d``, initial rate ``r0``."""

    k: CoefficientFunction
    sigma: CoefficientFunction
    d: int = 1
    r0: float = 0.0

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"dimension d must be a positive integer, got {self.d!r}", field="model.d")
        object.__setattr__(self, "d", int(self.d))
        if not (math.isfinite(self.r0) and self.r0 >= 0):
            raise ConfigError(f"r0 must be finite and >= 0, got {self.r0!r}", field="model.r0")

    @property
    def x0(self) -> float:
        """Common starting value of the OU components."""
        return math.sqrt(self.r0 / self.d)

    def drift(self, s, r):
        return self.d * self.sigma(s) ** 2 - 2.0 * self.k(s) * r

    def theta(self, s):
        """Implied mean-reversion level ``d sigma^2 / (2k)`` (inf where k == 0)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.d * self.sigma(s) ** 2 / (2.0 * self.k(s))


@dataclass(frozen=True)
class PricingWindow:
    t: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.T)):
            raise ConfigError("window times must be finite")
        if self.t < 0:
            raise ConfigError(f"window.t must be >= 0, got {self.t}", field="window.t")
        if self.t > self.T:
            raise ConfigError(f"window.t <= window.T violated ({self.t} > {self.T})",
                              field="window.t <= window.T")

    @property
    def tau(self) -> float:
        return self.T - self.t


@dataclass(frozen=True, eq=False)
class DriftIntegralCache:
    """Antiderivative ``K(s) = int_0^s k`` and the discounted tail integral.

    Stores on a uniform grid over ``[0, horizon]``:

    * ``K`` at the nodes, from composite Gauss-Legendre per cell;
    * ``E(x) = int_x^T exp(-2 (K(s) - K(x))) ds``.

    Both are interpolated with cubic Hermite splines using their known
    derivatives (``K' = k``, ``E' = 2 k E - 1``), or linearly when
    ``interpolation="linear"``.
    """

    k: CoefficientFunction
    horizon: float
    nodes: int = 2048
    order: int = 8
    interpolation: str = "hermite"
    _K: Callable = field(init=False, repr=False)
    _E: Callable = field(init=False, repr=False)

    def __post_init__(self):
        if self.nodes < 1 or self.order < 1:
            raise ConfigError("drift cache needs nodes >= 1 and order >= 1")
        if self.interpolation not in ("hermite", "linear"):
            raise ConfigError(f"unknown interpolation {self.interpolation!r}")
        T = float(self.horizon)
        grid = np.linspace(0.0, T, self.nodes + 1)
        x, w = np.polynomial.legendre.leggauss(self.order)
        h = T / self.nodes
        # cell-local GL nodes, shape (nodes, order)
        pts = grid[:-1, None] + 0.5 * h * (x[None, :] + 1.0)
        kvals = self.k(pts)
        if not np.all(np.isfinite(kvals)):
            raise CoefficientError("drift k is not finite on the cache grid")
        cell_K = 0.5 * h * (kvals @ w)
        K = np.concatenate([[0.0], np.cumsum(cell_K)])
        k_nodes = self.k(grid)
        K_interp = self._interp(grid, K, k_nodes)
        # E(x_i) = sum over cells to the right of exp(-2(K(s) - K(x_i))) ds
        cell_E = 0.5 * h * (np.exp(-2.0 * (K_interp(pts) - K[:-1, None])) @ w)
        E = np.zeros_like(grid)
        for i in range(self.nodes - 1, -1, -1):
            E[i] = cell_E[i] + math.exp(-2.0 * (K[i + 1] - K[i])) * E[i + 1]
        E_interp = self._interp(grid, E, 2.0 * k_nodes * E - 1.0)
        object.__setattr__(self, "_K", K_interp)
        object.__setattr__(self, "_E", E_interp)

    def _interp(self, grid, values, slopes):
        if self.interpolation == "linear" or len(grid) < 2:
            return lambda s: np.interp(s, grid, values)
        spline = CubicHermiteSpline(grid, values, slopes, extrapolate=False)
        return lambda s: spline(np.clip(s, 0.0, grid[-1]))

    def K(self, s):
        """``int_0^s k(u) du``."""
        if self.k.is_zero:
            return np.zeros(np.shape(s)) if np.ndim(s) else 0.0
        out = self._K(np.asarray(s, dtype=float))
        return out if np.ndim(out) else float(out)

    def tail(self, x):
        """``int_x^T exp(-2 (K(s) - K(x))) ds``."""
        if self.k.is_zero:
            return self.horizon - np.asarray(x, dtype=float) if np.ndim(x) else self.horizon - x
        out = self._E(np.asarray(x, dtype=float))
        return out if np.ndim(out) else float(out)

    def kappa_tilde(self, a, b):
        """``int_{a v b}^T exp(-int_a^s k - int_b^s k) ds`` (vectorized, symmetric)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        m = np.maximum(a, b)
        if self.k.is_zero:
            out = self.horizon - m
        else:
            Ka, Kb, Km = self._K(a), self._K(b), self._K(m)
            out = np.exp((Ka + Kb) - 2.0 * Km) * self._E(m)
        return out if out.ndim else float(out)


@lru_cache(maxsize=64)
def drift_cache(k: CoefficientFunction, T: float, nodes: int = 2048,
                interpolation: str = "hermite") -> DriftIntegralCache:
    """Shared read-only cache for the pair ``(k, T)``."""
    return DriftIntegralCache(k, float(T), nodes=nodes, interpolation=interpolation)


def kappa_tilde(a, b, T: float, model: ECIRModel):
    """Double-exponential kernel ``k~(a v b)`` for maturity ``T``.

    Reduces to ``T - max(a, b)`` when ``k == 0``.
    """
    if np.any(np.asarray(a) < 0) or np.any(np.asarray(b) < 0) \
            or np.any(np.asarray(a) > T) or np.any(np.asarray(b) > T):
        raise ValueError("kappa_tilde arguments must lie in [0, T]")
    return drift_cache(model.k, float(T)).kappa_tilde(a, b)


def time_factor(window: PricingWindow, model: ECIRModel, convention: str = "doubled") -> float:
    """Deterministic discount exponent per unit of ``r_t``.

    ``"doubled"`` is ``int_t^T exp(-2 int_t^s k) ds`` (the rate decays as the
    square of the OU mean); ``"printed"`` is the single-exponent variant
    ``int_t^T exp(-int_t^s k) ds``.
    """
    t, T = window.t, window.T
    if window.tau == 0:
        return 0.0
    if model.k.is_zero:
        return window.tau
    cache = drift_cache(model.k, float(T))
    if convention == "doubled":
        return float(cache.tail(t))
    if convention == "printed":
        from .quadrature import integrate_1d

        Kt = cache.K(t)
        return integrate_1d(lambda s: np.exp(-(cache.K(s) - Kt)), t, T, q=32)
    raise ConfigError(f"unknown time-factor convention {convention!r}")


def ou_path_x(t: float, model: ECIRModel, noise) -> np.ndarray:
    """OU component value at time ``t`` from Brownian increments on ``[0, t]``.

    ``noise`` has shape ``(..., steps)`` holding increments over a uniform
    grid; the stochastic integral of the explicit solution is discretized with
    left-point integrands.
    """
    dW = np.asarray(noise, dtype=float)
    steps = dW.shape[-1]
    x0 = model.x0
    if steps == 0 or t == 0:
        return np.full(dW.shape[:-1], x0)
    u = np.linspace(0.0, t, steps + 1)[:-1]
    if model.k.is_zero:
        decay_t = 1.0
        weights = model.sigma(u)
    else:
        cache = drift_cache(model.k, float(t))
        Kt = cache.K(t)
        decay_t = math.exp(-Kt)
        weights = np.exp(-(Kt - cache.K(u))) * model.sigma(u)
    return x0 * decay_t + dW @ weights
