"""Stratification of the two-unit maximizer set.

For units with ``n1 <= n2`` states the maximizers of mutual information are
the distributions with uniform first marginal whose second unit determines
the first. They split into strata indexed by maps
``pi: {1..n2} -> {0, 1..n1}`` that hit every label ``1..n1``: the stratum of
``pi`` holds the maximizers that are positive exactly on the graph of ``pi``
(label 0 meaning "this state of unit 2 carries no mass"). The strata are
ordered by fiber inclusion, ``sigma <= pi`` iff every fiber of ``sigma``
over ``1..n1`` sits inside the matching fiber of ``pi``.

Labels of :class:`PosetMap` are 1-based with 0 for the adjoined element. The
JSON node table is 0-based and writes the adjoined element as -1.
"""

from __future__ import annotations

import json
import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import BudgetError, ValidationError
from .probspace import Distribution, ProductSpace

POSET_BUDGET = 100_000


@dataclass(frozen=True)
class PosetMap:
    n1: int
    n2: int
    values: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        if len(values) != self.n2:
            raise ValidationError(f"map needs {self.n2} values, got {len(values)}")
        if any(not 0 <= v <= self.n1 for v in values):
            raise ValidationError(f"values must lie in 0..{self.n1}")
        if not set(range(1, self.n1 + 1)) <= set(values):
            raise ValidationError(f"map {values} misses a label of unit 1")
        object.__setattr__(self, "values", values)

    def fiber(self, a: int) -> frozenset[int]:
        """States of unit 2 (0-based) sent to label ``a``."""
        return frozenset(k for k, v in enumerate(self.values) if v == a)

    def graph(self) -> frozenset[tuple[int, int]]:
        """Cells ``(w1, w2)``, 0-based, where stratum members are positive."""
        return frozenset((v - 1, k) for k, v in enumerate(self.values) if v)

    def to_json_labels(self) -> list[int]:
        return [v - 1 if v else -1 for v in self.values]

    @classmethod
    def from_json_labels(cls, n1: int, labels) -> "PosetMap":
        return cls(n1, len(labels), tuple(int(v) + 1 if int(v) >= 0 else 0 for v in labels))

    def __str__(self):
        return "".join(str(v) for v in self.values) if self.n1 < 10 else ",".join(map(str, self.values))


def _check_dims(n1: int, n2: int) -> None:
    if n1 < 2 or n2 < 2:
        raise ValidationError("both units need at least 2 states")
    if n1 > n2:
        raise ValidationError(f"n1={n1} > n2={n2}: no surjection from unit 2 onto unit 1")


@lru_cache(maxsize=None)
def stirling2(l: int, k: int) -> int:
    """Stirling number of the second kind, by the standard recurrence."""
    if l < 0 or k < 0:
        raise ValidationError("stirling2 needs nonnegative arguments")
    if l == 0 and k == 0:
        return 1
    if l == 0 or k == 0 or k > l:
        return 0
    return k * stirling2(l - 1, k) + stirling2(l - 1, k - 1)


def poset_size(n1: int, n2: int) -> int:
    return sum(strata_counts_formula(n1, n2).values())


def strata_counts_formula(n1: int, n2: int) -> dict[int, int]:
    """Closed form: ``n1! * C(n2, l) * S(l, n1)`` strata of dimension ``l - n1``."""
    _check_dims(n1, n2)
    return {
        l - n1: math.factorial(n1) * math.comb(n2, l) * stirling2(l, n1)
        for l in range(n1, n2 + 1)
    }


def _iter_values(n1: int, n2: int) -> Iterator[tuple[int, ...]]:
    # depth-first over positions, pruning branches that can no longer cover 1..n1
    values = [0] * n2
    counts = [0] * (n1 + 1)

    def rec(pos: int, missing: int):
        if n2 - pos < missing:
            return
        if pos == n2:
            yield tuple(values)
            return
        for v in range(n1 + 1):
            values[pos] = v
            new = missing - (1 if v and counts[v] == 0 else 0)
            counts[v] += 1
            yield from rec(pos + 1, new)
            counts[v] -= 1

    yield from rec(0, n1)


def enumerate_poset(n1: int, n2: int, budget: int = POSET_BUDGET) -> list[PosetMap]:
    """All maps in lexicographic order of their value tuples."""
    _check_dims(n1, n2)
    size = poset_size(n1, n2)
    if size > budget:
        raise BudgetError(f"poset for ({n1},{n2}) has {size} maps, budget {budget}")
    return [PosetMap(n1, n2, v) for v in _iter_values(n1, n2)]


def leq(sigma: PosetMap, pi: PosetMap) -> bool:
    if (sigma.n1, sigma.n2) != (pi.n1, pi.n2):
        raise ValidationError("maps belong to different posets")
    return all(s == 0 or s == p for s, p in zip(sigma.values, pi.values))


def stratum_dim(pi: PosetMap) -> int:
    return sum(1 for v in pi.values if v) - pi.n1


def count_strata_by_dim(n1: int, n2: int) -> dict[int, int]:
    """Tally of enumerated strata by dimension."""
    return dict(sorted(Counter(stratum_dim(pi) for pi in enumerate_poset(n1, n2)).items()))


@dataclass(frozen=True)
class CoverGraph:
    nodes: tuple[PosetMap, ...]
    edges: tuple[tuple[int, int], ...]  # (lower, upper) node indices

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * len(self.nodes)
        comps = []
        for s in range(len(self.nodes)):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def to_edge_list(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in self.edges)

    def node_table(self) -> list[dict]:
        return [
            {"index": k, "map": pi.to_json_labels(), "dim": stratum_dim(pi)}
            for k, pi in enumerate(self.nodes)
        ]

    def to_dot(self) -> str:
        lines = ["graph cover {"]
        for k, pi in enumerate(self.nodes):
            lines.append(f'  n{k} [label="{pi}", dim={stratum_dim(pi)}];')
        for a, b in self.edges:
            lines.append(f"  n{a} -- n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def cover_graph(n1: int, n2: int, budget: int = POSET_BUDGET) -> CoverGraph:
    """Hasse diagram of the stratum poset.

    ``sigma`` is covered by ``pi`` exactly when ``sigma`` is ``pi`` with one
    state of a fiber of size at least two moved to 0: below ``pi`` sit only
    maps obtained by zeroing entries, and zeroing one entry at a time keeps
    every label covered along the way.
    """
    nodes = tuple(enumerate_poset(n1, n2, budget))
    index = {pi.values: k for k, pi in enumerate(nodes)}
    edges = []
    for k, pi in enumerate(nodes):
        sizes = Counter(pi.values)
        for pos, v in enumerate(pi.values):
            if v and sizes[v] >= 2:
                lower = pi.values[:pos] + (0,) + pi.values[pos + 1:]
                edges.append((index[lower], k))
    return CoverGraph(nodes, tuple(sorted(edges)))


def sample_stratum(pi: PosetMap, seed: int = 0) -> Distribution:
    """A random point of the stratum of ``pi`` on the ``n1 x n2`` space.

    Each fiber gets mass ``1/n1`` split by uniform spacings, which is a
    uniform draw from the open simplex of the fiber.
    """
    rng = np.random.default_rng(seed)
    p = np.zeros((pi.n1, pi.n2))
    for a in range(1, pi.n1 + 1):
        fib = sorted(pi.fiber(a))
        if len(fib) == 1:
            gaps = np.array([1.0])
        else:
            cuts = np.sort(rng.uniform(size=len(fib) - 1))
            gaps = np.diff(np.concatenate(([0.0], cuts, [1.0])))
        for k, g in zip(fib, gaps):
            p[a - 1, k] = g / pi.n1
    flat = p.ravel()
    return Distribution(ProductSpace((pi.n1, pi.n2)), flat / math.fsum(flat))


def stratum_of(p: Distribution, tol: float = 0.0) -> PosetMap | None:
    """The map whose stratum contains a two-unit maximizer ``p``."""
    if p.space.n_units != 2:
        raise ValidationError("strata are defined for two units")
    n1, n2 = p.space.cards
    t = p.to_float().tensor()
    values = []
    for k in range(n2):
        pos = [a for a in range(n1) if t[a, k] > tol]
        if len(pos) > 1:
            return None
        values.append(pos[0] + 1 if pos else 0)
    try:
        return PosetMap(n1, n2, tuple(values))
    except ValidationError:
        return None


def export_graph_json(g: CoverGraph) -> str:
    return json.dumps({"nodes": g.node_table(), "edges": [list(e) for e in g.edges]})


__all__ = [
    "PosetMap",
    "CoverGraph",
    "stirling2",
    "poset_size",
    "strata_counts_formula",
    "enumerate_poset",
    "leq",
    "stratum_dim",
    "count_strata_by_dim",
    "cover_graph",
    "sample_stratum",
    "stratum_of",
    "export_graph_json",
]
