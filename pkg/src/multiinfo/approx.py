"""Explicit approximating sequences for global maximizers, and a search heuristic.

Two constructions are implemented:

* the pure pair-interaction sequence. From a maximizer's surjection form,
  ``f_m`` is ``(m + ln(base(w_N) + 1/m)) / (N - 1)`` on configurations that
  follow every map from the hub and 0 elsewhere. ``f_m`` is projected onto
  the pure pair spaces of the star of pairs through the hub, and
  ``q_m = gibbs(projection)``;
* the quadratic-energy family for equal units. Points ``phi(w)`` in general
  position in R^n let a single hyperplane ``a.phi = b`` pass through exactly
  the ``n`` support points, and ``gibbs(-beta (a.phi - b)^2)`` concentrates
  on them as ``beta`` grows.

The projection step in the first construction can reweight configurations
on the support, so convergence is measured rather than assumed: every trace
reports the divergence together with the share of ``f_m`` the projection
discarded.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import BudgetError, ConvergenceError, NotAMaximizerError, ValidationError
from .interactions import RealFunction, project_onto_pure_IA
from .maximizers import SurjectionFamily, find_witness
from .probspace import (
    Distribution,
    ProductSpace,
    multi_information,
    upper_bound,
)

DEFAULT_M_SCHEDULE = (1, 2, 4, 8, 16, 32, 64, 128)
DEFAULT_BETA_SCHEDULE = tuple(2.0**k for k in range(21))
GENERAL_POSITION_BUDGET = 200_000


@dataclass
class ApproxTrace:
    """Divergences along a schedule of ``m`` or ``beta`` values."""

    schedule: list[float]
    kl: list[float]
    residual: list[float]
    iterates: list[Distribution] = field(default_factory=list)
    label: str = "m"

    @property
    def final(self) -> float:
        return self.kl[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m_or_beta", "kl", "projection_residual"])
        for s, k, r in zip(self.schedule, self.kl, self.residual):
            w.writerow([repr(float(s)), repr(float(k)), repr(float(r))])
        return buf.getvalue()


def _witness_of(p) -> SurjectionFamily:
    if isinstance(p, SurjectionFamily):
        if not p.is_valid(tol=1e-9):
            raise NotAMaximizerError("surjection family violates the pullback condition")
        return p
    w = find_witness(p)
    if w is None:
        raise NotAMaximizerError("distribution is not a global maximizer of multi-information")
    return w


def pair_sequence_energies(witness: SurjectionFamily, m: float) -> tuple[RealFunction, RealFunction]:
    """``(f_m, projected f_m)`` for a maximizer in surjection form."""
    if m < 1:
        raise ValidationError("m must be at least 1")
    space = witness.space
    N = space.n_units
    hub = witness.hub
    configs = space.configurations()
    hub_states = configs[:, hub]
    on_graph = np.ones(space.total, dtype=bool)
    for unit, pi in zip(witness.units[:-1], witness.maps):
        on_graph &= configs[:, unit] == np.asarray(pi)[hub_states]
    base = np.array([float(x) for x in witness.base.probs])
    level = (m + np.log(base[hub_states] + 1.0 / m)) / (N - 1)
    f = RealFunction(space, np.where(on_graph, level, 0.0))
    proj = np.zeros(space.total)
    for i in range(N):
        if i != hub:
            proj += project_onto_pure_IA(f, (i, hub)).values
    return f, RealFunction(space, proj)


def pair_sequence_log(p, m: float) -> np.ndarray:
    """ln q_m, computed in the log domain."""
    _, ft = pair_sequence_energies(_witness_of(p), m)
    return ft.values - logsumexp(ft.values)


def pair_sequence_element(p, m: float) -> Distribution:
    """The m-th pure pair-interaction approximant of the maximizer ``p``.

    ``p`` may be a distribution (its witness is recovered) or a
    :class:`SurjectionFamily`.
    """
    w = _witness_of(p)
    _, ft = pair_sequence_energies(w, m)
    x = ft.values - ft.values.max()
    e = np.exp(x)
    q = e / math.fsum(e)
    return Distribution(w.space, q / math.fsum(q))


def _divergence_log(p: Distribution, logq: np.ndarray) -> float:
    x = p.to_float().probs
    s = x > 0
    return max(math.fsum(x[s] * (np.log(x[s]) - logq[s])), 0.0)


def pair_sequence_trace(p, m_schedule: Sequence[float] = DEFAULT_M_SCHEDULE, keep_iterates: bool = False) -> ApproxTrace:
    w = _witness_of(p)
    target = w.to_distribution()
    ms = list(m_schedule)
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValidationError("schedule must be nonempty and strictly increasing")
    trace = ApproxTrace([], [], [], label="m")
    for m in ms:
        f, ft = pair_sequence_energies(w, m)
        logq = ft.values - logsumexp(ft.values)
        nf = np.linalg.norm(f.values)
        trace.schedule.append(m)
        trace.kl.append(_divergence_log(target, logq))
        trace.residual.append(float(np.linalg.norm(f.values - ft.values) / nf) if nf else 0.0)
        if keep_iterates:
            trace.iterates.append(pair_sequence_element(w, m))
    return trace


def pair_sequence_converges(
    p,
    m_schedule: Sequence[float] = DEFAULT_M_SCHEDULE,
    threshold: float = 1e-3,
) -> ApproxTrace:
    """Run the pair sequence; raise :class:`ConvergenceError` (carrying the
    trace) unless the last divergence is below ``threshold``."""
    trace = pair_sequence_trace(p, m_schedule)
    if not trace.final < threshold:
        raise ConvergenceError(
            f"pair sequence ends at D = {trace.final:.3e}, threshold {threshold:.1e}",
            best=trace,
            residual=trace.final,
        )
    return trace


# -- quadratic-energy family ------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeneralPositionMap:
    space: ProductSpace
    phi: np.ndarray  # (total, n)
    seed: int

    @property
    def n(self) -> int:
        return self.phi.shape[1]


def _equal_card(space: ProductSpace) -> int:
    space.require_system()
    if len(set(space.cards)) != 1:
        raise ValidationError(f"needs equal cardinalities, got {space.cards}")
    return space.cards[0]


def affinely_independent_subsets(points: np.ndarray, k: int, rel_tol: float = 1e-9) -> bool:
    """Whether every ``k`` of the points are affinely independent."""
    T = points.shape[0]
    k = min(k, T)
    if k <= 1:
        return True
    combos = np.array(list(itertools.combinations(range(T), k)))
    diffs = points[combos[:, 1:]] - points[combos[:, :1]]
    sv = np.linalg.svd(diffs, compute_uv=False)
    scale = np.abs(points).max()
    return bool(np.all(sv[:, k - 2] > rel_tol * max(scale, 1.0)))


def make_general_position(space: ProductSpace, seed: int = 0, max_retries: int = 10) -> GeneralPositionMap:
    """Gaussian points ``phi(w)`` in R^n, rank-checked for general position.

    Every subset of ``n + 1`` points is checked when there are at most
    ``GENERAL_POSITION_BUDGET`` of them; above that the hyperplane solve
    in :func:`support_hyperplane` is the certificate.
    """
    n = _equal_card(space)
    T = space.total
    k = min(n + 1, T)
    exhaustive = math.comb(T, k) <= GENERAL_POSITION_BUDGET
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        phi = rng.standard_normal((T, n))
        if not exhaustive or affinely_independent_subsets(phi, k):
            phi.setflags(write=False)
            return GeneralPositionMap(space, phi, seed)
    raise BudgetError(f"no general-position map after {max_retries} draws (seed {seed})")


def support_hyperplane(phi: GeneralPositionMap, support: Sequence[int]) -> tuple[np.ndarray, float]:
    """Unit-norm ``(a, b)`` with ``a.phi(w) = b`` exactly on ``support``."""
    support = list(support)
    pts = phi.phi[support]
    M = np.hstack([pts, -np.ones((len(support), 1))])
    _, s, vt = np.linalg.svd(M)
    v = vt[-1]
    a, b = v[:-1], float(v[-1])
    vals = phi.phi @ a - b
    on = np.zeros(phi.space.total, dtype=bool)
    on[support] = True
    if np.max(np.abs(vals[on])) > 1e-10 or (np.any(~on) and np.min(np.abs(vals[~on])) < 1e-6):
        raise ValidationError("hyperplane does not carve out the support; reseed the point map")
    return a, b


def quadratic_energy(phi: GeneralPositionMap, a: np.ndarray, b: float, beta: float) -> np.ndarray:
    return -beta * (phi.phi @ a - b) ** 2


def quadratic_generators(phi: GeneralPositionMap) -> np.ndarray:
    """Columns ``phi_i`` and ``phi_i phi_j`` (i <= j): (n^2 + 3n)/2 functions."""
    P = phi.phi
    n = phi.n
    cols = [P[:, i] for i in range(n)]
    cols += [P[:, i] * P[:, j] for i in range(n) for j in range(i, n)]
    return np.column_stack(cols)


def quadratic_family_dim_bound(n: int) -> int:
    return (n * n + 3 * n) // 2


def _quadratic_support(p: Distribution, phi: GeneralPositionMap) -> list[int]:
    n = _equal_card(p.space)
    if phi.space != p.space:
        raise ValidationError("point map and distribution live on different spaces")
    support = [int(k) for k in p.support()]
    if len(support) != n:
        raise ValidationError(f"support has {len(support)} points, the construction needs exactly {n}")
    return support


def quadratic_family_element(p: Distribution, phi: GeneralPositionMap, beta: float) -> Distribution:
    """gibbs(-beta (a.phi - b)^2) for the hyperplane through phi(supp p)."""
    a, b = support_hyperplane(phi, _quadratic_support(p, phi))
    E = quadratic_energy(phi, a, b, beta)
    e = np.exp(E - E.max())
    q = e / math.fsum(e)
    return Distribution(p.space, q / math.fsum(q))


def quadratic_trace(p: Distribution, phi: GeneralPositionMap, betas: Sequence[float] = DEFAULT_BETA_SCHEDULE) -> ApproxTrace:
    a, b = support_hyperplane(phi, _quadratic_support(p, phi))
    G = np.column_stack([np.ones(p.space.total), quadratic_generators(phi)])
    trace = ApproxTrace([], [], [], label="beta")
    for beta in betas:
        E = quadratic_energy(phi, a, b, beta)
        logq = E - logsumexp(E)
        coef, *_ = np.linalg.lstsq(G, E, rcond=None)
        scale = max(np.abs(E).max(), 1.0)
        trace.schedule.append(float(beta))
        trace.kl.append(_divergence_log(p, logq))
        trace.residual.append(float(np.max(np.abs(G @ coef - E)) / scale))
    return trace


# -- heuristic search -------------------------------------------------------

def multi_information_gradient(p: Distribution) -> np.ndarray:
    """Gradient of multi-information along the simplex at a positive ``p``."""
    x = p.to_float().tensor()
    if np.any(x <= 0):
        raise ValidationError("gradient needs a strictly positive distribution")
    g = _log_ratio(np.log(x))
    return (g - g.mean()).ravel()


def _log_ratio(logp: np.ndarray) -> np.ndarray:
    g = logp.copy()
    N = logp.ndim
    for i in range(N):
        axes = tuple(j for j in range(N) if j != i)
        g -= logsumexp(logp, axis=axes, keepdims=True)
    return g


def _mirror_ascent(logp: np.ndarray, iters: int, step: float) -> np.ndarray:
    for _ in range(iters):
        g = _log_ratio(logp)
        logp = logp + step * g
        logp = logp - logsumexp(logp)
    return logp


def search_local_maximizer(
    space: ProductSpace,
    seed: int = 0,
    iters: int = 2000,
    step: float = 0.1,
    restarts: int = 20,
    init: Distribution | None = None,
) -> tuple[Distribution, float]:
    """Exponentiated-gradient ascent of multi-information from random starts.

    Returns the best endpoint over ``restarts`` Dirichlet(1) starts, or the
    single endpoint reached from ``init``. Nothing guarantees a global
    maximum; the value never exceeds the upper bound.
    """
    space.require_system()
    rng = np.random.default_rng(seed)
    starts = []
    if init is not None:
        x = init.to_float().probs
        if np.any(x <= 0):
            raise ValidationError("init must be strictly positive")
        starts.append(np.log(x).reshape(space.shape))
    else:
        for _ in range(restarts):
            starts.append(np.log(rng.dirichlet(np.ones(space.total))).reshape(space.shape))
    best, best_val = None, -math.inf
    for s in starts:
        logp = _mirror_ascent(s, iters, step)
        x = np.exp(logp).ravel()
        d = Distribution(space, x / math.fsum(x))
        v = multi_information(d)
        if v > best_val:
            best, best_val = d, v
    bound = upper_bound(space)
    if best_val > bound + 1e-9:
        raise AssertionError(f"multi-information {best_val} exceeds the bound {bound}")
    return best, best_val


__all__ = [
    "ApproxTrace",
    "DEFAULT_M_SCHEDULE",
    "DEFAULT_BETA_SCHEDULE",
    "pair_sequence_energies",
    "pair_sequence_log",
    "pair_sequence_element",
    "pair_sequence_trace",
    "pair_sequence_converges",
    "GeneralPositionMap",
    "affinely_independent_subsets",
    "make_general_position",
    "support_hyperplane",
    "quadratic_energy",
    "quadratic_generators",
    "quadratic_family_dim_bound",
    "quadratic_family_element",
    "quadratic_trace",
    "multi_information_gradient",
    "search_local_maximizer",
]
