"""Stateless counter-based normal variates keyed by ``(seed, path, draw)``.

Each draw is a pure function of its key, so any partition of paths across
chunks or workers reproduces the same numbers. Bits come from two rounds of
the SplitMix64 finalizer; normals from the inverse normal CDF.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(v) for v in (30, 27, 31, 11))


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def path_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    """Per-path stream keys derived from the run seed and path indices."""
    base = np.uint64(_mix_int(seed))
    idx = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(idx * np.uint64(_GOLDEN) + base)


def uniforms(keys: np.ndarray, draw: int) -> np.ndarray:
    """Uniforms in (0, 1) for draw number ``draw`` of each keyed stream."""
    offset = np.uint64(((draw + 1) * _GOLDEN) & _MASK)
    with np.errstate(over="ignore"):
        z = _mix(keys + offset)
    return ((z >> _S11).astype(np.float64) + 0.5) * (2.0 ** -53)


def normals(keys: np.ndarray, draw: int) -> np.ndarray:
    """Standard normal variates for draw ``draw`` of each keyed stream."""
    return ndtri(uniforms(keys, draw))
