"""Run configuration: flat ``section.key = value`` text.

One pair per line, ``#`` starts a comment. Unknown keys are rejected.
Example::

    model.k = 0
    model.sigma = const:1
    model.d = 1
    model.r0 = 0.5
    window.t = 0.8
    window.T = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .gnm import GnmConfig
from .model import CoefficientFunction, ECIRModel, PricingWindow
from .oracles import PATH_RULES, SCHEMES, McConfig
from .quadrature import MODES

_REQUIRED = object()


@dataclass(frozen=True)
class ModelSpec:
    k: str = "0"
    sigma: str = _REQUIRED
    d: int = 1
    r0: float = _REQUIRED


@dataclass(frozen=True)
class WindowSpec:
    t: float = 0.0
    T: float = _REQUIRED
    r_t: float | None = None


@dataclass(frozen=True)
class SeriesSpec:
    N: int = 4
    q: int = 8
    tol: float = 1e-10
    alpha: float = 1.0
    beta: float = 9.0
    mode: str = "simplex"
    max_order: int = 6
    time_factor: str = "doubled"


@dataclass(frozen=True)
class McSpec:
    paths: int = 1_000_000
    steps: int = 400
    seed: int = 20240521
    scheme: str = "ou-sum"
    workers: int = 1
    chunk: int = 1 << 16
    path_rule: str = "simpson"


@dataclass(frozen=True)
class RiccatiSpec:
    h: float | None = None
    convention: str = "doubled"


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class CompareSpec:
    tol_riccati: float = 1e-4
    mc_sigmas: float = 3.0
    mc_floor: float = 1e-4
    mc_stderr_max: float = 5e-4


@dataclass(frozen=True)
class ExperimentSpec:
    presets: str = "linear_decay,exp_decay,sin"

    @property
    def preset_list(self) -> list[str]:
        return [p.strip() for p in self.presets.split(",") if p.strip()]


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    window: WindowSpec
    series: SeriesSpec = field(default_factory=SeriesSpec)
    mc: McSpec = field(default_factory=McSpec)
    riccati: RiccatiSpec = field(default_factory=RiccatiSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    compare: CompareSpec = field(default_factory=CompareSpec)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)

    def pricing_window(self) -> PricingWindow:
        return PricingWindow(self.window.t, self.window.T)

    @property
    def r_t(self) -> float:
        return self.model.r0 if self.window.r_t is None else self.window.r_t

    def build_model(self, sigma: str | None = None) -> ECIRModel:
        T = self.window.T
        k = CoefficientFunction.parse(self.model.k, T)
        sig = CoefficientFunction.parse(self.model.sigma if sigma is None else sigma, T)
        return ECIRModel(k, sig, self.model.d, self.model.r0)

    def gnm_config(self) -> GnmConfig:
        s = self.series
        return GnmConfig(max_order=s.max_order, alpha=s.alpha, beta=s.beta)

    def mc_config(self) -> McConfig:
        m = self.mc
        return McConfig(paths=m.paths, steps=m.steps, seed=m.seed, scheme=m.scheme,
                        chunk=m.chunk, workers=m.workers, path_rule=m.path_rule)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, mc=replace(self.mc, seed=seed))


_SECTION_TYPES = {
    "model": ModelSpec, "window": WindowSpec, "series": SeriesSpec, "mc": McSpec,
    "riccati": RiccatiSpec, "output": OutputSpec, "compare": CompareSpec,
    "experiment": ExperimentSpec,
}


def _field_kind(cls, name: str):
    for f in fields(cls):
        if f.name == name:
            t = f.type if isinstance(f.type, str) else f.type.__name__
            return t.replace(" | None", "")
    return None


def _convert(kind: str, raw: str, key: str, line: int):
    try:
        if kind == "int":
            try:
                return int(raw)
            except ValueError:
                value = float(raw)
                if not value.is_integer():
                    raise
                return int(value)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
    except ValueError:
        raise ConfigError(f"expected {kind}, got {raw!r}", code="type", field=key, line=line) from None
    return raw


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text; defaults fill omitted optional keys."""
    values: dict[str, dict] = {name: {} for name in _SECTION_TYPES}
    lines: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", code="syntax", line=lineno)
        key, _, raw = (part.strip() for part in line.partition("="))
        section, dot, name = key.partition(".")
        if not dot or not name or not raw:
            raise ConfigError(f"malformed entry {line!r}", code="syntax", field=key or None, line=lineno)
        cls = _SECTION_TYPES.get(section)
        kind = _field_kind(cls, name) if cls else None
        if kind is None:
            raise ConfigError(f"unknown key {key!r}", code="unknown-key", field=key, line=lineno)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", code="syntax",
                              field=key, line=lineno)
        lines[key] = lineno
        values[section][name] = _convert(kind, raw, key, lineno)

    sections = {}
    for section, cls in _SECTION_TYPES.items():
        for f in fields(cls):
            if f.default is _REQUIRED and f.name not in values[section]:
                raise ConfigError("required key missing", code="constraint", field=f"{section}.{f.name}")
        sections[section] = cls(**values[section])
    cfg = RunConfig(**sections)
    _validate(cfg, lines)
    return cfg


def _check(cond: bool, message: str, key: str, lines: dict):
    if not cond:
        raise ConfigError(message, code="constraint", field=key, line=lines.get(key))


def _validate(cfg: RunConfig, lines: dict) -> None:
    w, s, m = cfg.window, cfg.series, cfg.mc
    _check(w.t >= 0, "window.t must be >= 0", "window.t", lines)
    _check(w.t <= w.T, f"window.t <= window.T violated ({w.t} > {w.T})", "window.t", lines)
    _check(cfg.model.d >= 1, "model.d must be a positive integer", "model.d", lines)
    _check(cfg.model.r0 >= 0, "model.r0 must be >= 0", "model.r0", lines)
    _check(w.r_t is None or w.r_t >= 0, "window.r_t must be >= 0", "window.r_t", lines)
    _check(0 <= s.max_order, "series.max_order must be >= 0", "series.max_order", lines)
    _check(0 <= s.N <= s.max_order, f"series.N must lie in [0, series.max_order={s.max_order}]",
           "series.N", lines)
    _check(s.q >= 1, "series.q must be >= 1", "series.q", lines)
    _check(s.tol >= 0, "series.tol must be >= 0", "series.tol", lines)
    _check(s.alpha >= 1, "series.alpha must be >= 1", "series.alpha", lines)
    _check(s.beta > 2, "series.beta must be > 2", "series.beta", lines)
    _check(s.mode in MODES, f"series.mode must be one of {MODES}", "series.mode", lines)
    _check(s.time_factor in ("doubled", "printed"), "series.time_factor must be doubled|printed",
           "series.time_factor", lines)
    _check(m.paths >= 1 and m.steps >= 1, "mc.paths and mc.steps must be >= 1", "mc.paths", lines)
    _check(0 <= m.seed < 2 ** 64, "mc.seed must be an unsigned 64-bit integer", "mc.seed", lines)
    _check(m.scheme in SCHEMES, f"mc.scheme must be one of {SCHEMES}", "mc.scheme", lines)
    _check(m.path_rule in PATH_RULES, f"mc.path_rule must be one of {PATH_RULES}", "mc.path_rule", lines)
    _check(m.workers >= 1 and m.chunk >= 1, "mc.workers and mc.chunk must be >= 1", "mc.workers", lines)
    _check(cfg.riccati.h is None or cfg.riccati.h > 0, "riccati.h must be > 0", "riccati.h", lines)
    _check(cfg.riccati.convention in ("doubled", "printed"), "riccati.convention must be doubled|printed",
           "riccati.convention", lines)
    _check(cfg.output.format == "csv", "output.format must be csv", "output.format", lines)
    c = cfg.compare
    _check(min(c.tol_riccati, c.mc_sigmas, c.mc_floor, c.mc_stderr_max) >= 0,
           "compare tolerances must be >= 0", "compare", lines)
    # coefficient specs must parse and evaluate finitely on [0, T]
    for key in ("model.k", "model.sigma"):
        try:
            CoefficientFunction.parse(getattr(cfg.model, key.split(".")[1]), w.T)
        except ConfigError as exc:
            raise ConfigError(str(exc), code=exc.code, field=key, line=lines.get(key)) from None
        except ValueError as exc:
            raise ConfigError(str(exc), code="constraint", field=key, line=lines.get(key)) from None
