"""Brute-force ground truth for G_n^m by direct differentiation.

``D^2_{s_n} ... D^2_{s_1} exp(Y)`` is expanded with the product rule, using
only two facts about ``Y = -int_t^T X_s^2 ds``: ``D_s exp(Y) = exp(Y) D_s Y``
and third derivatives of ``Y`` vanish. Terms carry exact rational
coefficients. Freezing replaces

* ``D_{s_i} Y``        by ``-2 k(s_i, t) sigma(s_i) X_t``
* ``D_{s_i s_j} Y``    by ``-2 k(s_i, s_j) sigma(s_i) sigma(s_j)``

and collecting powers of ``X_t`` yields ``G_n^m``. Every index carries
``sigma^2`` in total, so ``sigma`` is divided out before any numeric
substitution.

The same term lists are classified into the partition catalog (singletons,
self pairs, doubled pairs, cycles, chains) with predicted prefactors.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, StructuralError
from .model import ECIRModel, drift_cache

MAX_DIFF_ORDER = 4

Factor = tuple  # sorted tuple of 1 or 2 one-based indices: (i,) is D_i Y, (i, j) is D_ij Y


@dataclass(frozen=True)
class DerivativeTerm:
    coefficient: Fraction
    factors: tuple  # sorted tuple of Factor, a multiset

    def index_counts(self) -> Counter:
        return Counter(i for f in self.factors for i in f)

    @property
    def power(self) -> int:
        """Number of first-derivative factors (= 2m for an X_t^(2m) term)."""
        return sum(1 for f in self.factors if len(f) == 1)

    def __str__(self) -> str:
        body = " * ".join(f"D[{','.join(map(str, f))}]Y" for f in self.factors) or "1"
        return f"{self.coefficient} * {body}"


def _apply_derivative(terms: dict, j: int) -> dict:
    out: dict = defaultdict(Fraction)
    for factors, c in terms.items():
        out[tuple(sorted(factors + ((j,),)))] += c
        for pos, f in enumerate(factors):
            if len(f) < 2:
                new = factors[:pos] + (tuple(sorted(f + (j,))),) + factors[pos + 1:]
                out[tuple(sorted(new))] += c
    return {k: v for k, v in out.items() if v != 0}


def _sort_key(term: DerivativeTerm):
    return (term.power, len(term.factors), term.factors)


def differentiate(n: int) -> list[DerivativeTerm]:
    """Full expansion of ``D^2_{s_n} ... D^2_{s_1} F / F`` as a list of terms."""
    if n < 0 or n > MAX_DIFF_ORDER:
        raise CapacityError(f"differentiate supports 0 <= n <= {MAX_DIFF_ORDER}, got {n}")
    terms: dict = {(): Fraction(1)}
    for j in range(1, n + 1):
        terms = _apply_derivative(terms, j)
        terms = _apply_derivative(terms, j)
    return sorted((DerivativeTerm(c, f) for f, c in terms.items()), key=_sort_key)


def dump_terms(n: int) -> str:
    """One term per line, ``coefficient * product``, stable order."""
    return "\n".join(str(term) for term in differentiate(n)) + "\n"


def freeze_and_collect(terms, t: float, T: float, nodes, model: ECIRModel | None = None) -> np.ndarray:
    """Frozen coefficients ``[G_n^0, ..., G_n^n]`` at ``nodes``.

    ``nodes`` has shape ``(n,)`` or ``(P, n)``; the result has shape
    ``(n + 1,)`` or ``(P, n + 1)``.
    """
    arr = np.asarray(nodes, dtype=float)
    batched = arr.ndim == 2
    arr = np.atleast_2d(arr)
    n = arr.shape[1]
    if model is None or model.k.is_zero:
        def kern(a, b):
            return T - np.maximum(a, b)
    else:
        kern = drift_cache(model.k, float(T)).kappa_tilde
    tcol = np.full(arr.shape[0], float(t))
    cache: dict = {}

    def frozen(f):
        if f not in cache:
            if len(f) == 1:
                cache[f] = -2.0 * kern(arr[:, f[0] - 1], tcol)
            else:
                cache[f] = -2.0 * kern(arr[:, f[0] - 1], arr[:, f[1] - 1])
        return cache[f]

    out = np.zeros((arr.shape[0], n + 1))
    for term in terms:
        if term.index_counts() != Counter({i: 2 for i in range(1, n + 1)}):
            raise StructuralError(f"term {term} does not use every index exactly twice")
        val = np.full(arr.shape[0], float(term.coefficient))
        for f in term.factors:
            val = val * frozen(f)
        out[:, term.power // 2] += val
    return out if batched else out[0]


@dataclass(frozen=True)
class Block:
    case: int          # row of the partition catalog, 1..5
    indices: tuple     # vertices in traversal order
    k: int             # block size parameter (cycle/chain length)
    prefactor: int


@dataclass(frozen=True)
class PartitionShape:
    blocks: tuple
    predicted_coefficient: int

    def cases(self) -> Counter:
        return Counter(b.case for b in self.blocks)


def classify(term: DerivativeTerm) -> PartitionShape:
    """Assign each factor block of ``term`` to a catalog case and check its prefactor.

    Cases: 1 singleton ``D_i Y``; 2 self pair ``D_ii Y``; 3 doubled pair
    ``2 (D_ij Y)^2``; 4 cycle of length ``k >= 3`` with prefactor ``2^k``;
    5 chain of length ``k >= 2`` with prefactor ``2^k`` (its two end points
    also carry singletons).
    """
    counts = term.index_counts()
    if any(c != 2 for c in counts.values()):
        raise StructuralError(f"index multiplicity violated in {term}")
    if any(len(f) > 2 for f in term.factors):
        raise StructuralError(f"third derivative of Y in {term}")

    parent = {i: i for i in counts}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for f in term.factors:
        if len(f) == 2:
            parent[find(f[0])] = find(f[1])
    comps: dict = defaultdict(list)
    for i in counts:
        comps[find(i)].append(i)

    blocks = []
    for verts in comps.values():
        verts = sorted(verts)
        vs = set(verts)
        loops = [f for f in term.factors if len(f) == 2 and f[0] == f[1] and f[0] in vs]
        edges = [f for f in term.factors if len(f) == 2 and f[0] != f[1] and f[0] in vs]
        legs = [f[0] for f in term.factors if len(f) == 1 and f[0] in vs]
        k = len(verts)
        if k == 1 and loops and not legs:
            blocks.append(Block(2, tuple(verts), 1, 1))
        elif k == 1 and len(legs) == 2:
            blocks += [Block(1, tuple(verts), 1, 1)] * 2
        elif loops:
            raise StructuralError(f"self pair inside a larger block in {term}")
        elif k == 2 and len(edges) == 2 and not legs:
            blocks.append(Block(3, tuple(verts), 2, 2))
        elif k >= 3 and len(edges) == k and not legs:
            blocks.append(Block(4, _walk(verts, edges, cycle=True), k, 2 ** k))
        elif k >= 2 and len(edges) == k - 1 and len(legs) == 2 and legs[0] != legs[1]:
            order = _walk(verts, edges, cycle=False, start=min(legs))
            if {order[0], order[-1]} != set(legs):
                raise StructuralError(f"singletons not at chain ends in {term}")
            blocks.append(Block(5, order, k, 2 ** k))
            blocks += [Block(1, (legs[0],), 1, 1), Block(1, (legs[1],), 1, 1)]
        else:
            raise StructuralError(f"unclassifiable block {verts} in {term}")

    predicted = 1
    for b in blocks:
        predicted *= b.prefactor
    if Fraction(predicted) != term.coefficient:
        raise StructuralError(f"coefficient {term.coefficient} of {term} differs from the "
                              f"catalog prediction {predicted}")
    return PartitionShape(tuple(sorted(blocks, key=lambda b: (b.case, b.indices))), predicted)


def _walk(verts, edges, cycle: bool, start=None) -> tuple:
    adj: dict = defaultdict(list)
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    if any(len(adj[v]) > 2 for v in verts):
        raise StructuralError(f"vertex of degree > 2 among {verts}")
    cur = verts[0] if start is None else start
    order = [cur]
    prev = None
    while True:
        nxt = [v for v in adj[cur] if v != prev and v not in order]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
    if len(order) != len(verts):
        raise StructuralError(f"block {verts} is not connected as a single {'cycle' if cycle else 'chain'}")
    if cycle and order[0] not in adj[order[-1]]:
        raise StructuralError(f"block {verts} does not close into a cycle")
    return tuple(order)
