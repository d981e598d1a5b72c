"""Interaction spaces and exponential families on a product space.

For a set of units ``A`` the space I_A holds the functions that depend only
on the coordinates in ``A``; its orthogonal projection ``Pi_A`` averages out
the other coordinates. The pure interaction space of ``A`` is the part of
I_A orthogonal to every I_B with B a proper subset of A, and its projection
is obtained by Moebius inversion over the subset lattice::

    pure_A(f) = sum_{B subset A} (-1)^{|A \\ B|} Pi_B(f)

An :class:`InteractionFamilySpec` names a collection of unit sets; the
exponential family it generates is the Gibbs image of the direct sum of the
corresponding pure spaces. Constants are absorbed by normalization.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, ValidationError
from .probspace import Distribution, ProductSpace, normalize_units

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RealFunction:
    """A real function on Omega_V stored in the same layout as distributions."""

    space: ProductSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size != self.space.total:
            raise ValidationError(f"function has {v.size} values, space needs {self.space.total}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def tensor(self) -> np.ndarray:
        return self.values.reshape(self.space.shape)

    def inner(self, other: "RealFunction") -> float:
        return float(self.values @ other.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __add__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(self.space, self.values + other.values)

    def __sub__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(self.space, self.values - other.values)

    def scale(self, c: float) -> "RealFunction":
        return RealFunction(self.space, c * self.values)

    @classmethod
    def log_of(cls, p: Distribution) -> "RealFunction":
        """ln p for a strictly positive distribution."""
        x = p.to_float().probs
        if np.any(x <= 0):
            raise ValidationError("ln p needs a strictly positive distribution")
        return cls(p.space, np.log(x))


def _sets_key(A: frozenset) -> tuple:
    return (len(A), tuple(sorted(A)))


@dataclass(frozen=True)
class InteractionFamilySpec:
    """A collection of distinct unit sets (0-based) over a product space."""

    space: ProductSpace
    sets: tuple[frozenset, ...]

    def __post_init__(self):
        seen = []
        for A in self.sets:
            A = frozenset(normalize_units(A, self.space.n_units))
            if A in seen:
                raise ValidationError(f"duplicate interaction set {sorted(A)}")
            seen.append(A)
        object.__setattr__(self, "sets", tuple(sorted(seen, key=_sets_key)))

    @classmethod
    def of_order(cls, space: ProductSpace, k: int) -> "InteractionFamilySpec":
        """All sets of size at most ``k`` (the hierarchy level I^(k))."""
        units = range(space.n_units)
        sets = [frozenset(c) for r in range(1, k + 1) for c in itertools.combinations(units, r)]
        return cls(space, tuple(sets))

    @classmethod
    def pure_order(cls, space: ProductSpace, k: int) -> "InteractionFamilySpec":
        """All sets of size exactly ``k``."""
        return cls(space, tuple(frozenset(c) for c in itertools.combinations(range(space.n_units), k)))

    @classmethod
    def factorizable(cls, space: ProductSpace) -> "InteractionFamilySpec":
        return cls.of_order(space, 1)

    @classmethod
    def star(cls, space: ProductSpace, hub: int | None = None) -> "InteractionFamilySpec":
        """Pure pair interactions between ``hub`` and every other unit.

        The default hub is the last unit of largest cardinality.
        """
        if hub is None:
            hub = space.sorted_order()[-1]
        if not 0 <= hub < space.n_units:
            raise ValidationError(f"hub {hub} out of range")
        return cls(space, tuple(frozenset((i, hub)) for i in range(space.n_units) if i != hub))

    def to_dict(self) -> dict:
        return {
            "cards": list(self.space.cards),
            "sets": [[i + 1 for i in sorted(A)] for A in self.sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionFamilySpec":
        """Parse the JSON form, whose unit labels are 1-based."""
        space = ProductSpace(tuple(data["cards"]))
        raw = [tuple(A) for A in data["sets"]]
        if len(set(frozenset(A) for A in raw)) != len(raw):
            raise ValidationError("duplicate interaction set")
        sets = []
        for A in raw:
            if any(not 1 <= int(u) <= space.n_units for u in A):
                raise ValidationError(f"unit label out of range in {list(A)}")
            sets.append(frozenset(int(u) - 1 for u in A))
        return cls(space, tuple(sets))

    @classmethod
    def from_json(cls, text: str) -> "InteractionFamilySpec":
        return cls.from_dict(json.loads(text))


def gibbs(X: RealFunction) -> Distribution:
    """The Gibbs measure exp(X) / sum exp(X)."""
    x = X.values
    if not np.all(np.isfinite(x)):
        raise ValidationError("gibbs needs finite values")
    return Distribution(X.space, _gibbs_probs(x))


def _gibbs_probs(x: np.ndarray) -> np.ndarray:
    e = np.exp(x - x.max())
    q = e / math.fsum(e)
    return q / math.fsum(q)


def _average(t: np.ndarray, A: tuple[int, ...]) -> np.ndarray:
    axes = tuple(i for i in range(t.ndim) if i not in A)
    if not axes:
        return t
    return np.broadcast_to(t.mean(axis=axes, keepdims=True), t.shape)


def project_onto_IA(f: RealFunction, A: Iterable[int]) -> RealFunction:
    """Average ``f`` over every coordinate outside ``A``."""
    A = normalize_units(A, f.space.n_units)
    return RealFunction(f.space, _average(f.tensor(), A).ravel())


def project_onto_pure_IA(f: RealFunction, A: Iterable[int]) -> RealFunction:
    A = normalize_units(A, f.space.n_units)
    t = f.tensor()
    out = np.zeros(t.shape)
    for r in range(len(A) + 1):
        sign = -1.0 if (len(A) - r) % 2 else 1.0
        for B in itertools.combinations(A, r):
            out += sign * _average(t, B)
    return RealFunction(f.space, out.ravel())


def project_onto_family(f: RealFunction, spec: InteractionFamilySpec, constants: bool = True) -> RealFunction:
    """Orthogonal projection onto the sum of the family's pure spaces (plus constants)."""
    out = np.zeros(f.space.total)
    sets = list(spec.sets)
    if constants and frozenset() not in sets:
        sets.append(frozenset())
    for A in sets:
        out += project_onto_pure_IA(f, A).values
    return RealFunction(f.space, out)


def family_residual(f: RealFunction, spec: InteractionFamilySpec) -> float:
    """Max-norm distance of ``f`` from constants plus the family's pure spaces."""
    return float(np.max(np.abs(f.values - project_onto_family(f, spec).values)))


def pure_dim(space: ProductSpace, A: Iterable[int]) -> int:
    A = normalize_units(A, space.n_units)
    return math.prod(space.cards[i] - 1 for i in A)


def family_dim(spec: InteractionFamilySpec) -> int:
    return sum(pure_dim(spec.space, A) for A in spec.sets if A)


def _unit_contrasts(n: int) -> np.ndarray:
    # rows e_k - 1/n, k = 0..n-2
    c = np.eye(n)[: n - 1] - 1.0 / n
    return c


def _gram_schmidt(vectors: list[np.ndarray], tol: float = 1e-12) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for v in vectors:
        w = v.astype(np.float64).copy()
        for _ in range(2):
            for u in out:
                w -= (u @ w) * u
        nrm = np.linalg.norm(w)
        if nrm > tol:
            out.append(w / nrm)
    return out


def pure_basis(space: ProductSpace, A: Iterable[int]) -> list[np.ndarray]:
    """Orthonormal basis of the pure space of ``A`` from tensored unit contrasts."""
    A = normalize_units(A, space.n_units)
    if not A:
        return [np.full(space.total, 1.0 / math.sqrt(space.total))]
    factors = []
    for i in range(space.n_units):
        if i in A:
            factors.append(_unit_contrasts(space.cards[i]))
        else:
            factors.append(np.ones((1, space.cards[i])))
    raw = []
    for combo in itertools.product(*(range(F.shape[0]) for F in factors)):
        v = factors[0][combo[0]]
        for F, k in zip(factors[1:], combo[1:]):
            v = np.multiply.outer(v, F[k])
        raw.append(np.asarray(v).ravel())
    return _gram_schmidt(raw)


def basis_of_family(spec: InteractionFamilySpec) -> list[RealFunction]:
    """Orthonormal spanning set of the family's pure spaces, constants excluded.

    Ordered by set size, then lexicographic set, then contrast index.
    """
    out = []
    for A in spec.sets:
        if not A:
            continue
        out.extend(RealFunction(spec.space, v) for v in pure_basis(spec.space, A))
    return out


def basis_matrix(spec: InteractionFamilySpec) -> np.ndarray:
    """The family basis as columns of a ``(total, dim)`` array."""
    funcs = basis_of_family(spec)
    if not funcs:
        return np.zeros((spec.space.total, 0))
    return np.column_stack([f.values for f in funcs])


class ProjectionResult(NamedTuple):
    distribution: Distribution
    divergence: float
    residual: float
    iterations: int
    theta: np.ndarray


def _divergence_from_logq(p: np.ndarray, logq: np.ndarray) -> float:
    s = p > 0
    return max(math.fsum(p[s] * (np.log(p[s]) - logq[s])), 0.0)


def fit_family(
    p: Distribution,
    spec: InteractionFamilySpec,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> ProjectionResult:
    """Minimize D(p || q) over q in the family by natural-parameter ascent.

    Maximizes the log-likelihood ``sum p ln q_theta`` with damped Newton
    steps (gradient steps when the curvature is useless) and an Armijo
    backtracking line search. Stops when the moment mismatch
    ``max |E_p[b] - E_q[b]|`` over the basis falls below ``tol``.

    When no step improves the objective any more the current iterate is
    returned with its residual; this is what happens for targets whose
    support pattern is not reachable inside the family's closure.
    Exhausting ``max_iter`` raises :class:`ConvergenceError`.
    """
    if p.space != spec.space:
        raise ValidationError("distribution and family live on different spaces")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    B = basis_matrix(spec)
    target = p.to_float().probs
    d = B.shape[1]
    theta = np.zeros(d)
    moments = B.T @ target

    def objective(th):
        e = B @ th
        return float(moments @ th - logsumexp(e))

    def state(th):
        e = B @ th
        logq = e - logsumexp(e)
        return logq, np.exp(logq)

    logq, q = state(theta)
    grad = moments - B.T @ q
    value = objective(theta)
    it = 0
    for it in range(1, max_iter + 1):
        if d == 0 or np.max(np.abs(grad)) <= tol:
            break
        Bq = B.T @ q
        H = B.T @ (q[:, None] * B) - np.outer(Bq, Bq)
        damping = 1e-12 * max(np.trace(H), 1e-300)
        try:
            step = np.linalg.solve(H + damping * np.eye(d), grad)
        except np.linalg.LinAlgError:
            step = grad
        slope = float(grad @ step)
        if not np.all(np.isfinite(step)) or slope <= 0:
            step = grad
            slope = float(grad @ grad)
        t = 1.0
        improved = False
        while t > 1e-14:
            cand = theta + t * step
            v = objective(cand)
            if v >= value + 1e-4 * t * slope:
                improved = True
                break
            t *= 0.5
        if not improved:
            log.warning(
                "information projection stalled at moment residual %.3e after %d steps",
                float(np.max(np.abs(grad))), it,
            )
            break
        theta = cand
        value = v
        logq, q = state(theta)
        grad = moments - B.T @ q
    else:
        res = float(np.max(np.abs(grad)))
        if res > tol:
            best = Distribution(p.space, _gibbs_probs(B @ theta))
            raise ConvergenceError(
                f"information projection did not converge in {max_iter} steps (residual {res:.3e})",
                best=best,
                residual=res,
                divergence=_divergence_from_logq(target, logq),
            )

    res = float(np.max(np.abs(grad))) if d else 0.0
    qd = Distribution(p.space, _gibbs_probs(B @ theta) if d else np.full(p.space.total, 1.0 / p.space.total))
    return ProjectionResult(qd, _divergence_from_logq(target, logq), res, it, theta)


def info_projection(
    p: Distribution,
    spec: InteractionFamilySpec,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> tuple[Distribution, float]:
    """The family member closest to ``p`` in relative entropy, and that divergence."""
    r = fit_family(p, spec, tol=tol, max_iter=max_iter)
    return r.distribution, r.divergence


__all__ = [
    "RealFunction",
    "InteractionFamilySpec",
    "ProjectionResult",
    "gibbs",
    "project_onto_IA",
    "project_onto_pure_IA",
    "project_onto_family",
    "family_residual",
    "pure_dim",
    "family_dim",
    "pure_basis",
    "basis_of_family",
    "basis_matrix",
    "fit_family",
    "info_projection",
]
