"""Global maximizers of multi-information.

With units sorted so that the last one (the hub) is largest, the value
``sum_{i<N} ln n_i`` is attained exactly by the distributions of the form::

    p(w_1, ..., w_N) = base(w_N)  if w_i = pi_i(w_N) for every i < N, else 0

where each ``pi_i`` maps the hub surjectively onto unit ``i`` and the base
distribution gives every fiber ``{pi_i = a}`` mass ``1/n_i``. Such a
maximizer exists iff the hub has at least ``n_min(n_1, ..., n_{N-1})``
states, the size of the union of the grids ``{j/n_i : j = 1..n_i}``.

Everything here works in exact rational arithmetic. Internally configuration
labels are 0-based array indices; the 1-based labels of the grid
construction are exposed by :func:`phi_points`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import BudgetError, NoMaximizerError, ValidationError
from .exactlp import feasible_point
from .probspace import Distribution, ProductSpace, marginal

DEFAULT_TOL = 1e-9
ENUMERATION_CAP = 10_000
# exhaustive oracle budget: product of non-hub cards, hub size
MAX_NONHUB_CONFIGS = 12
MAX_HUB = 8


def _check_cards(cards: Sequence[int]) -> tuple[int, ...]:
    cards = tuple(int(c) for c in cards)
    if not cards:
        raise ValidationError("n_min needs at least one cardinality")
    if any(c < 2 for c in cards):
        raise ValidationError(f"cardinalities must be >= 2, got {cards}")
    return cards


def n_min(cards: Sequence[int]) -> int:
    """Smallest hub size admitting a maximizer, by GCD inclusion-exclusion.

    ``cards`` are the cardinalities of the non-hub units.
    """
    cards = _check_cards(cards)
    total = 0
    for r in range(1, len(cards) + 1):
        sign = 1 if r % 2 else -1
        for sub in itertools.combinations(cards, r):
            total += sign * reduce(math.gcd, sub)
    return total


def lcm(cards: Sequence[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), cards, 1)


def n_min_bounds(cards: Sequence[int]) -> dict[str, int]:
    """The elementary bounds max(cards) <= n_min <= min(1 + sum(n_i - 1), lcm)."""
    cards = _check_cards(cards)
    return {
        "max": max(cards),
        "coprime": 1 + sum(c - 1 for c in cards),
        "lcm": lcm(cards),
    }


@dataclass(frozen=True)
class TSet:
    """Sorted union of the grids ``{j/n : j = 1..n}`` over the given denominators."""

    denominators: tuple[int, ...]
    points: tuple[Fraction, ...]

    def __len__(self):
        return len(self.points)

    def __str__(self):
        return "{" + ",".join(str(x) for x in self.points) + "}"


def build_tset(cards: Sequence[int]) -> TSet:
    cards = _check_cards(cards)
    pts = sorted({Fraction(j, n) for n in cards for j in range(1, n + 1)})
    return TSet(cards, tuple(pts))


def phi_points(cards: Sequence[int]) -> list[tuple[Fraction, tuple[int, ...]]]:
    """Pairs ``(weight, config)`` of the grid construction, 1-based labels.

    ``cards`` is the full sorted tuple including the hub. The j-th grid point
    ``d_j`` goes to ``(ceil(d_j n_1), ..., ceil(d_j n_{N-1}), j)`` with weight
    ``d_j - d_{j-1}``.
    """
    cards = tuple(cards)
    T = build_tset(cards[:-1])
    out = []
    prev = Fraction(0)
    for j, d in enumerate(T.points, start=1):
        cfg = tuple(math.ceil(d * n) for n in cards[:-1]) + (j,)
        out.append((d - prev, cfg))
        prev = d
    return out


def construct_maximizer(space: ProductSpace) -> Distribution:
    """Exact rational maximizer from the grid construction.

    Units are sorted internally (the largest last) and permuted back.
    Raises :class:`NoMaximizerError` if the hub is below ``n_min``.
    """
    space.require_system()
    order = space.sorted_order()
    cards = tuple(space.cards[i] for i in order)
    need = n_min(cards[:-1])
    if cards[-1] < need:
        raise NoMaximizerError(
            f"no maximizer on {space.cards}: the hub has {cards[-1]} states but "
            f"n_min({', '.join(map(str, cards[:-1]))}) = {need} (short by {need - cards[-1]})",
            n_hub=cards[-1],
            n_min=need,
        )
    weights = {}
    for w, cfg in phi_points(cards):
        sorted_cfg = tuple(c - 1 for c in cfg)
        orig = [0] * len(cards)
        for k, unit in enumerate(order):
            orig[unit] = sorted_cfg[k]
        weights[tuple(orig)] = w
    return Distribution.from_weights(space, weights, mode="rational")


@dataclass(frozen=True, eq=False)
class SurjectionFamily:
    """Canonical form of a maximizer: hub base distribution plus maps.

    ``units`` lists unit indices by ascending cardinality; ``units[-1]`` is
    the hub and ``maps[k]`` sends hub state ``j`` to a state of ``units[k]``.
    """

    space: ProductSpace
    units: tuple[int, ...]
    maps: tuple[tuple[int, ...], ...]
    base: Distribution

    @property
    def hub(self) -> int:
        return self.units[-1]

    def is_valid(self, tol: float | None = None) -> bool:
        """Surjectivity and uniform pullback masses (exact for rational bases)."""
        n_hub = self.space.cards[self.hub]
        if self.base.space.cards != (n_hub,):
            return False
        b = self.base.probs
        for unit, pi in zip(self.units[:-1], self.maps):
            n = self.space.cards[unit]
            if len(pi) != n_hub or set(pi) != set(range(n)):
                return False
            for a in range(n):
                mass = sum((b[j] for j in range(n_hub) if pi[j] == a), Fraction(0) if self.base.is_rational else 0.0)
                if self.base.is_rational and tol is None:
                    if mass != Fraction(1, n):
                        return False
                elif abs(float(mass) - 1.0 / n) > (tol or DEFAULT_TOL):
                    return False
        return True

    def to_distribution(self) -> Distribution:
        n_hub = self.space.cards[self.hub]
        weights = {}
        for j in range(n_hub):
            w = self.base.probs[j]
            if w > 0:
                cfg = [0] * self.space.n_units
                cfg[self.hub] = j
                for unit, pi in zip(self.units[:-1], self.maps):
                    cfg[unit] = pi[j]
                weights[tuple(cfg)] = w
        return Distribution.from_weights(space=self.space, weights=weights, mode=self.base.mode)

    def to_dict(self) -> dict:
        """Witness JSON; every label is 0-based."""
        return {
            "pi": [list(m) for m in self.maps],
            "base": self.base.to_dict()["probs"],
            "units": list(self.units),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _balanced_completion(pi: list[int | None], n: int) -> tuple[int, ...]:
    # unassigned hub states go to the fiber with fewest hub states, ties to the smallest label
    counts = [0] * n
    for a in pi:
        if a is not None:
            counts[a] += 1
    out = []
    for a in pi:
        if a is None:
            a = min(range(n), key=lambda k: (counts[k], k))
            counts[a] += 1
        out.append(a)
    return tuple(out)


def find_witness(p: Distribution, tol: float = DEFAULT_TOL) -> SurjectionFamily | None:
    """Return the surjection-family form of ``p`` if it is a global maximizer.

    Checks, with the largest unit as hub: every hub state of positive mass
    carries exactly one positive cell, so the support defines maps from the
    hub to the other units; and every non-hub marginal is uniform, which is
    the pullback condition and forces surjectivity. Rational inputs are
    checked exactly; float inputs treat entries ``<= tol`` as zero and allow
    ``tol`` slack on the marginals.

    Hub states without mass are assigned so fibers stay as even as possible.
    """
    space = p.space
    space.require_system()
    units = space.sorted_order()
    hub = units[-1]
    exact = p.is_rational
    t = np.moveaxis(p.tensor(), hub, -1)  # remaining axes keep their relative order
    rest = [u for u in range(space.n_units) if u != hub]
    n_hub = space.cards[hub]
    flat = t.reshape(-1, n_hub)
    rest_space = ProductSpace(tuple(space.cards[u] for u in rest))

    def positive(x):
        return x > 0 if exact else float(x) > tol

    assigned: dict[int, list[int | None]] = {u: [None] * n_hub for u in rest}
    base = []
    for j in range(n_hub):
        col = flat[:, j]
        pos = [k for k in range(col.size) if positive(col[k])]
        if len(pos) > 1:
            return None
        if pos:
            cfg = rest_space.decode(pos[0])
            for u, a in zip(rest, cfg):
                assigned[u][j] = a
            base.append(col[pos[0]] if exact else float(col[pos[0]]))
        else:
            base.append(Fraction(0) if exact else 0.0)
    if not exact:
        # everything outside the graph must be negligible
        off = float(np.sum(flat.astype(np.float64))) - math.fsum(base)
        if off > tol * flat.size:
            return None
    for u in rest:
        m = marginal(p, [u]).probs
        n = space.cards[u]
        if exact:
            if any(x != Fraction(1, n) for x in m):
                return None
        elif np.max(np.abs(m.astype(np.float64) - 1.0 / n)) > tol:
            return None
    if exact:
        base_d = Distribution(ProductSpace((n_hub,)), np.array(base, dtype=object))
    else:
        b = np.array(base, dtype=np.float64)
        base_d = Distribution(ProductSpace((n_hub,)), b / math.fsum(b))
    maps = tuple(_balanced_completion(assigned[u], space.cards[u]) for u in units[:-1])
    return SurjectionFamily(space, units, maps, base_d)


def is_maximizer(p: Distribution, tol: float = DEFAULT_TOL) -> bool:
    return find_witness(p, tol) is not None


def _budget_check(space: ProductSpace) -> tuple[tuple[int, ...], tuple[int, ...]]:
    space.require_system()
    units = space.sorted_order()
    nonhub = tuple(space.cards[u] for u in units[:-1])
    hub = space.cards[units[-1]]
    if math.prod(nonhub) > MAX_NONHUB_CONFIGS or hub > MAX_HUB:
        raise BudgetError(
            f"space {space.cards} is beyond the exhaustive budget "
            f"(non-hub configurations {math.prod(nonhub)} > {MAX_NONHUB_CONFIGS} or hub {hub} > {MAX_HUB})"
        )
    return units, nonhub


def find_maximizer_exhaustive(space: ProductSpace) -> SurjectionFamily | None:
    """Search every surjection tuple for one admitting a valid base distribution.

    A tuple of maps from the hub only matters through the set S of non-hub
    configurations it hits: hub states landing on the same configuration can
    pool their mass, and hub states may carry no mass at all. So a maximizer
    exists iff some S with ``|S| <= n_hub`` whose projections cover every
    unit supports nonnegative weights with uniform one-unit marginals. Larger
    S only add freedom, so sets of size ``min(n_hub, |Omega_rest|)`` suffice.
    The weight problem is decided by exact rational linear feasibility.
    """
    units, nonhub = _budget_check(space)
    n_hub = space.cards[units[-1]]
    rest_space = ProductSpace(nonhub)
    configs = [rest_space.decode(k) for k in range(rest_space.total)]
    size = min(n_hub, len(configs))
    rows_index = [(k, a) for k, n in enumerate(nonhub) for a in range(n)]
    rhs = [Fraction(1, nonhub[k]) for k, _ in rows_index]
    for S in itertools.combinations(configs, size):
        if any(len({c[k] for c in S}) < n for k, n in enumerate(nonhub)):
            continue
        A = [[1 if c[k] == a else 0 for c in S] for k, a in rows_index]
        x = feasible_point(A, rhs)
        if x is None:
            continue
        maps = [[0] * n_hub for _ in nonhub]
        base = [Fraction(0)] * n_hub
        for j, c in enumerate(S):
            base[j] = x[j]
            for k in range(len(nonhub)):
                maps[k][j] = c[k]
        # spare hub states copy the first configuration with zero mass
        for j in range(len(S), n_hub):
            for k in range(len(nonhub)):
                maps[k][j] = S[0][k]
        fam = SurjectionFamily(
            space,
            units,
            tuple(tuple(m) for m in maps),
            Distribution(ProductSpace((n_hub,)), np.array(base, dtype=object)),
        )
        return fam
    return None


def exists_maximizer_exhaustive(space: ProductSpace) -> bool:
    """Exact existence oracle independent of the ``n_min`` formula."""
    return find_maximizer_exhaustive(space) is not None


def maximizer_exists(space: ProductSpace) -> bool:
    """Existence by the threshold rule ``n_hub >= n_min``."""
    space.require_system()
    cards = sorted(space.cards)
    return cards[-1] >= n_min(cards[:-1])


def count_equal_unit_maximizers(n: int, N: int) -> int:
    return math.factorial(n) ** (N - 1)


def enumerate_equal_unit_maximizers(n: int, N: int, cap: int = ENUMERATION_CAP) -> list[Distribution]:
    """All maximizers when every unit has ``n`` states.

    Each is uniform on the ``n`` points ``(pi_1(j), ..., pi_{N-1}(j), j)``
    for a tuple of bijections ``pi_i``.
    """
    if n < 2 or N < 2:
        raise ValidationError("need n >= 2 and N >= 2")
    count = count_equal_unit_maximizers(n, N)
    if count > cap:
        raise BudgetError(f"{count} maximizers exceed the cap {cap}")
    space = ProductSpace((n,) * N)
    perms = list(itertools.permutations(range(n)))
    w = Fraction(1, n)
    out = []
    for combo in itertools.product(perms, repeat=N - 1):
        weights = {tuple(pi[j] for pi in combo) + (j,): w for j in range(n)}
        out.append(Distribution.from_weights(space, weights, mode="rational"))
    return out


__all__ = [
    "n_min",
    "n_min_bounds",
    "lcm",
    "TSet",
    "build_tset",
    "phi_points",
    "construct_maximizer",
    "SurjectionFamily",
    "find_witness",
    "is_maximizer",
    "find_maximizer_exhaustive",
    "exists_maximizer_exhaustive",
    "maximizer_exists",
    "count_equal_unit_maximizers",
    "enumerate_equal_unit_maximizers",
]
