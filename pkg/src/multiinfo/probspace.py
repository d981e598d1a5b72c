"""Product configuration spaces, distributions and entropic quantities.

Configurations of a system of units with cardinalities ``cards = (n_1, ..., n_N)``
are stored as dense vectors in lexicographic order: unit 1 varies slowest and
unit N fastest, which is numpy's C order for an array of shape ``cards``.
Units are addressed by 0-based axis indices in the Python API.

Two numeric modes are supported. ``"float"`` distributions carry a float64
payload; ``"rational"`` distributions carry :class:`fractions.Fraction`
entries in an object array and every identity on them is exact. Converting
between modes is always explicit (:meth:`Distribution.to_float`,
:meth:`Distribution.to_rational`).

All entropies are in nats.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

NORMALIZATION_TOL = 1e-12
FACTORIZABILITY_TOL = 1e-9

#: Value returned by :func:`kl_divergence` when the support condition fails.
INFINITY = math.inf


@dataclass(frozen=True)
class ProductSpace:
    """The configuration set Omega_1 x ... x Omega_N.

    A space with a single unit is allowed so that marginals and hub
    distributions have a home; anything that talks about interdependence
    calls :meth:`require_system` first.
    """

    cards: tuple[int, ...]

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cards)
        if not cards:
            raise ValidationError("a product space needs at least one unit")
        if any(c < 2 for c in cards):
            raise ValidationError(f"every unit needs at least 2 configurations, got {cards}")
        object.__setattr__(self, "cards", cards)

    @property
    def n_units(self) -> int:
        return len(self.cards)

    @property
    def total(self) -> int:
        return math.prod(self.cards)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cards

    def require_system(self) -> None:
        if self.n_units < 2:
            raise ValidationError(f"need at least 2 units, got {self.n_units}")

    def encode(self, config: Sequence[int]) -> int:
        if len(config) != self.n_units:
            raise ValidationError(f"configuration {tuple(config)} has wrong length")
        k = 0
        for w, n in zip(config, self.cards):
            if not 0 <= w < n:
                raise ValidationError(f"configuration {tuple(config)} out of range for {self.cards}")
            k = k * n + int(w)
        return k

    def decode(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total:
            raise ValidationError(f"index {index} out of range for total {self.total}")
        out = []
        for n in reversed(self.cards):
            index, r = divmod(index, n)
            out.append(r)
        return tuple(reversed(out))

    def configurations(self) -> np.ndarray:
        """All configurations as a ``(total, N)`` integer array, in storage order."""
        grids = np.indices(self.cards).reshape(self.n_units, -1)
        return grids.T.copy()

    def subspace(self, units: Iterable[int]) -> "ProductSpace":
        units = normalize_units(units, self.n_units)
        if not units:
            raise ValidationError("subspace needs a nonempty set of units")
        return ProductSpace(tuple(self.cards[i] for i in units))

    def sorted_order(self) -> tuple[int, ...]:
        """Stable permutation listing units by ascending cardinality.

        The last entry is the hub unit used by the maximizer constructions.
        """
        return tuple(sorted(range(self.n_units), key=lambda i: self.cards[i]))


def normalize_units(units: Iterable[int], n_units: int) -> tuple[int, ...]:
    out = tuple(sorted(set(int(u) for u in units)))
    for u in out:
        if not 0 <= u < n_units:
            raise ValidationError(f"unit index {u} out of range for {n_units} units")
    return out


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


@dataclass(frozen=True, eq=False)
class Distribution:
    """A normalized nonnegative vector over a :class:`ProductSpace`."""

    space: ProductSpace
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs)
        if probs.dtype == object:
            probs = np.array([_as_fraction(x) for x in probs.ravel()], dtype=object)
        else:
            probs = np.asarray(probs, dtype=np.float64).ravel()
        if probs.size != self.space.total:
            raise ValidationError(
                f"probability vector has length {probs.size}, space needs {self.space.total}"
            )
        if probs.dtype == object:
            if any(x < 0 for x in probs):
                raise ValidationError("negative probability")
            if sum(probs, Fraction(0)) != 1:
                raise ValidationError("rational probabilities do not sum to 1")
        else:
            if not np.all(np.isfinite(probs)):
                raise ValidationError("non-finite probability")
            if np.any(probs < 0):
                raise ValidationError("negative probability")
            if abs(math.fsum(probs) - 1.0) > NORMALIZATION_TOL:
                raise ValidationError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    # -- constructors -------------------------------------------------
    @classmethod
    def uniform(cls, space: ProductSpace, mode: str = "float") -> "Distribution":
        if mode == "rational":
            return cls(space, np.full(space.total, Fraction(1, space.total), dtype=object))
        return cls(space, np.full(space.total, 1.0 / space.total))

    @classmethod
    def point_mass(cls, space: ProductSpace, config: Sequence[int], mode: str = "float") -> "Distribution":
        return cls.from_weights(space, {tuple(config): 1}, mode=mode)

    @classmethod
    def from_weights(cls, space: ProductSpace, weights: dict, mode: str = "rational") -> "Distribution":
        """Build from ``{configuration: mass}``; unlisted configurations get 0."""
        if mode == "rational":
            probs = np.array([Fraction(0)] * space.total, dtype=object)
            for cfg, w in weights.items():
                probs[space.encode(cfg)] += _as_fraction(w)
        else:
            probs = np.zeros(space.total)
            for cfg, w in weights.items():
                probs[space.encode(cfg)] += float(w)
        return cls(space, probs)

    @classmethod
    def from_array(cls, array, mode: str | None = None) -> "Distribution":
        """Build from an N-dimensional array whose shape gives the cards."""
        arr = np.asarray(array)
        space = ProductSpace(arr.shape)
        if mode == "rational" or (mode is None and arr.dtype == object):
            return cls(space, np.array([_as_fraction(x) for x in arr.ravel()], dtype=object))
        return cls(space, arr.astype(np.float64).ravel())

    # -- views ---------------------------------------------------------
    @property
    def mode(self) -> str:
        return "rational" if self.probs.dtype == object else "float"

    @property
    def is_rational(self) -> bool:
        return self.probs.dtype == object

    def tensor(self) -> np.ndarray:
        return self.probs.reshape(self.space.shape)

    def support(self) -> np.ndarray:
        """Sorted storage indices with positive mass."""
        return np.flatnonzero(np.array([x > 0 for x in self.probs], dtype=bool))

    def support_configurations(self) -> list[tuple[int, ...]]:
        return [self.space.decode(int(k)) for k in self.support()]

    def to_float(self) -> "Distribution":
        if not self.is_rational:
            return self
        return Distribution(self.space, np.array([float(x) for x in self.probs]))

    def to_rational(self, max_denominator: int | None = None) -> "Distribution":
        """Exact conversion; with ``max_denominator`` every entry is rounded
        to the nearest such fraction and the last support entry absorbs the
        rounding so the result stays normalized."""
        if self.is_rational:
            return self
        fr = [Fraction(float(x)) for x in self.probs]
        if max_denominator is not None:
            fr = [f.limit_denominator(max_denominator) for f in fr]
            diff = 1 - sum(fr, Fraction(0))
            k = int(np.argmax(self.probs))
            fr[k] += diff
        return Distribution(self.space, np.array(fr, dtype=object))

    def permute_units(self, order: Sequence[int]) -> "Distribution":
        """Reorder axes: unit ``k`` of the result is unit ``order[k]`` of self."""
        order = tuple(order)
        space = ProductSpace(tuple(self.space.cards[i] for i in order))
        return Distribution(space, np.transpose(self.tensor(), order).ravel())

    def allclose(self, other: "Distribution", atol: float = 1e-12) -> bool:
        if self.space != other.space:
            return False
        a = self.to_float().probs
        b = other.to_float().probs
        return bool(np.max(np.abs(a - b)) <= atol)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        if self.space != other.space or self.mode != other.mode:
            return False
        return bool(np.all(self.probs == other.probs))

    def __hash__(self):
        return hash((self.space, tuple(self.probs.tolist())))

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        if self.is_rational:
            probs = [f"{x.numerator}/{x.denominator}" for x in self.probs]
        else:
            probs = [float(x) for x in self.probs]
        return {"cards": list(self.space.cards), "mode": self.mode, "probs": probs}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Distribution":
        try:
            space = ProductSpace(tuple(data["cards"]))
            mode = data.get("mode", "float")
            raw = data["probs"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed distribution document: {exc}") from exc
        if mode == "rational":
            return cls(space, np.array([Fraction(str(x)) for x in raw], dtype=object))
        if mode != "float":
            raise ValidationError(f"unknown mode {mode!r}")
        return cls(space, np.array(raw, dtype=np.float64))

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        return cls.from_dict(json.loads(text))


def marginal(p: Distribution, units: Iterable[int]) -> Distribution:
    """Image measure of ``p`` under the restriction to ``units``."""
    units = normalize_units(units, p.space.n_units)
    if not units:
        raise ValidationError("marginal needs a nonempty set of units")
    other = tuple(i for i in range(p.space.n_units) if i not in units)
    t = p.tensor()
    if other:
        t = t.sum(axis=other)
    return Distribution(p.space.subspace(units), np.asarray(t).ravel())


def product_of_marginals(p: Distribution) -> Distribution:
    """The factorizable distribution with the same one-unit marginals as ``p``."""
    margs = [marginal(p, [i]).probs for i in range(p.space.n_units)]
    prod = functools.reduce(np.multiply.outer, margs)
    return Distribution(p.space, np.asarray(prod).ravel())


def _xlogx_terms(probs: np.ndarray) -> list[float]:
    out = []
    for x in probs:
        if x > 0:
            xf = float(x)
            out.append(xf * math.log(xf))
    return out


def entropy(p: Distribution) -> float:
    """Shannon entropy with the convention 0 ln 0 = 0."""
    h = -math.fsum(_xlogx_terms(p.probs))
    return max(h, 0.0)


def entropy_of(p: Distribution, units: Iterable[int]) -> float:
    return entropy(marginal(p, units))


def conditional_entropy(p: Distribution, target: Iterable[int], given: Iterable[int]) -> float:
    """H(X_target | X_given); ``given`` may be empty."""
    target = set(target)
    given = set(given)
    joint = entropy_of(p, target | given)
    return joint - (entropy_of(p, given) if given else 0.0)


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """Relative entropy D(p || q); :data:`INFINITY` when supp p is not inside supp q."""
    if p.space != q.space:
        raise ValidationError(f"spaces differ: {p.space.cards} vs {q.space.cards}")
    terms = []
    for a, b in zip(p.probs, q.probs):
        if a > 0:
            if not b > 0:
                return INFINITY
            af, bf = float(a), float(b)
            terms.append(af * (math.log(af) - math.log(bf)))
    return max(math.fsum(terms), 0.0)


def multi_information(p: Distribution) -> float:
    """Sum of the one-unit entropies minus the joint entropy."""
    p.space.require_system()
    hs = [entropy_of(p, [i]) for i in range(p.space.n_units)]
    return max(math.fsum(hs) - entropy(p), 0.0)


def pair_mutual_information(p: Distribution, i: int, j: int) -> float:
    return multi_information(marginal(p, [i, j]))


def upper_bound(space: ProductSpace) -> float:
    """Sum of ln n_i over all units except one of largest cardinality."""
    space.require_system()
    cards = sorted(space.cards)
    return math.fsum(math.log(n) for n in cards[:-1])


def is_factorizable(p: Distribution, tol: float = FACTORIZABILITY_TOL) -> bool:
    """Whether ``p`` equals the product of its marginals (exactly in rational mode)."""
    q = product_of_marginals(p)
    if p.is_rational:
        return bool(all(a == b for a, b in zip(p.probs, q.probs)))
    return bool(np.max(np.abs(p.probs - q.probs)) <= tol)


def random_distribution(space: ProductSpace, rng: np.random.Generator, alpha: float = 1.0) -> Distribution:
    """Dirichlet(alpha) sample, renormalized with fsum so it passes validation."""
    x = rng.dirichlet(np.full(space.total, alpha))
    x = x / math.fsum(x)
    return Distribution(space, x)


def random_rational_distribution(space: ProductSpace, rng: np.random.Generator, scale: int = 97) -> Distribution:
    weights = rng.integers(0, scale, size=space.total)
    if weights.sum() == 0:
        weights[0] = 1
    total = int(weights.sum())
    return Distribution(space, np.array([Fraction(int(w), total) for w in weights], dtype=object))


def total_variation(p: Distribution, q: Distribution) -> float:
    if p.space != q.space:
        raise ValidationError("spaces differ")
    return 0.5 * float(np.sum(np.abs(p.to_float().probs - q.to_float().probs)))


__all__ = [
    "INFINITY",
    "ProductSpace",
    "Distribution",
    "marginal",
    "product_of_marginals",
    "entropy",
    "entropy_of",
    "conditional_entropy",
    "kl_divergence",
    "multi_information",
    "pair_mutual_information",
    "upper_bound",
    "is_factorizable",
    "random_distribution",
    "random_rational_distribution",
    "total_variation",
    "normalize_units",
]
