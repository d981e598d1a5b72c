"""The existence threshold, the construction and the maximizer characterization."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from multiinfo.errors import BudgetError, NoMaximizerError, ValidationError
from multiinfo.exactlp import feasible_point
from multiinfo.maximizers import (
    SurjectionFamily,
    build_tset,
    construct_maximizer,
    count_equal_unit_maximizers,
    enumerate_equal_unit_maximizers,
    exists_maximizer_exhaustive,
    find_maximizer_exhaustive,
    find_witness,
    is_maximizer,
    lcm,
    maximizer_exists,
    n_min,
    n_min_bounds,
    phi_points,
)
from multiinfo.probspace import (
    Distribution,
    ProductSpace,
    marginal,
    multi_information,
    pair_mutual_information,
    random_distribution,
    upper_bound,
)


def tset_size(cards):
    return len({Fraction(j, n) for n in cards for j in range(1, n + 1)})


def scipy_exists(space):
    """Float LP oracle: some set of hub-many non-hub configurations carries uniform marginals."""
    cards = sorted(space.cards)
    nonhub, hub = cards[:-1], cards[-1]
    configs = list(itertools.product(*(range(n) for n in nonhub)))
    for S in itertools.combinations(configs, min(hub, len(configs))):
        A, b = [], []
        for k, n in enumerate(nonhub):
            for a in range(n):
                A.append([1.0 if c[k] == a else 0.0 for c in S])
                b.append(1.0 / n)
        res = linprog(np.zeros(len(S)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        if res.status == 0:
            return True
    return False


class TestNmin:
    @pytest.mark.parametrize(
        "cards, expected",
        [
            ((2,), 2),
            ((2, 3), 4),
            ((2, 4), 4),
            ((3, 3, 3), 3),
            ((4, 6), 8),
            ((2, 3, 5), 8),
            ((6, 10, 15), 22),
        ],
    )
    def test_hand_values(self, cards, expected):
        assert n_min(cards) == expected

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(2, 12), min_size=1, max_size=4))
    def test_equals_union_size(self, cards):
        assert n_min(cards) == tset_size(cards) == len(build_tset(cards))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(2, 12), min_size=1, max_size=4))
    def test_bounds(self, cards):
        b = n_min_bounds(cards)
        assert b["max"] <= n_min(cards) <= min(b["coprime"], b["lcm"])

    def test_coprime_attains_upper_bound(self):
        assert n_min((3, 4, 5)) == 1 + 2 + 3 + 4

    def test_tset_string(self):
        assert str(build_tset((2, 3))) == "{1/3,1/2,2/3,1}"

    def test_lcm(self):
        assert lcm((4, 6, 10)) == 60

    def test_rejects_small(self):
        with pytest.raises(ValidationError):
            n_min((1, 3))


class TestConstruction:
    def test_phi_points_2_3(self):
        pts = phi_points((2, 3, 4))
        assert pts == [
            (Fraction(1, 3), (1, 1, 1)),
            (Fraction(1, 6), (1, 2, 2)),
            (Fraction(1, 6), (2, 2, 3)),
            (Fraction(1, 3), (2, 3, 4)),
        ]

    def test_diagonal(self):
        p = construct_maximizer(ProductSpace((2, 2)))
        assert p.to_dict()["probs"] == ["1/2", "0/1", "0/1", "1/2"]

    @pytest.mark.parametrize("cards", [(2, 2), (2, 3), (3, 3, 3), (2, 3, 6), (2, 3, 4), (6, 2, 3), (4, 2, 2, 3)])
    def test_attains_bound(self, cards):
        p = construct_maximizer(ProductSpace(cards))
        assert p.is_rational
        assert multi_information(p) == pytest.approx(upper_bound(p.space), abs=1e-12)
        assert len(p.support()) == n_min(sorted(cards)[:-1])

    def test_unsorted_cards_are_permuted_back(self):
        p = construct_maximizer(ProductSpace((6, 2, 3)))
        for u, n in enumerate((6, 2, 3)):
            m = marginal(p, [u]).probs
            if n < 6:
                assert all(x == Fraction(1, n) for x in m)

    def test_below_threshold_reports_deficit(self):
        with pytest.raises(NoMaximizerError) as exc:
            construct_maximizer(ProductSpace((2, 3, 3)))
        assert exc.value.deficit == 1
        assert exc.value.n_min == 4


class TestCharacterization:
    def test_witness_of_2_3_6(self):
        w = find_witness(construct_maximizer(ProductSpace((2, 3, 6))))
        assert w.maps == ((0, 0, 1, 1, 0, 1), (0, 1, 1, 2, 0, 2))
        assert [str(x) for x in w.base.probs] == ["1/3", "1/6", "1/6", "1/3", "0", "0"]
        assert w.is_valid()
        assert w.to_distribution() == construct_maximizer(ProductSpace((2, 3, 6)))

    def test_balanced_completion_fills_small_fibers(self):
        w = find_witness(construct_maximizer(ProductSpace((2, 3, 6))))
        for pi, n in zip(w.maps, (2, 3)):
            sizes = [pi.count(a) for a in range(n)]
            assert max(sizes) - min(sizes) <= 1

    def test_float_input(self):
        p = construct_maximizer(ProductSpace((3, 3, 3))).to_float()
        assert is_maximizer(p)
        assert find_witness(p).is_valid(tol=1e-12)

    def test_uniform_is_not(self):
        assert not is_maximizer(Distribution.uniform(ProductSpace((2, 2))))

    def test_counterexample_is_maximizer(self):
        p = Distribution.from_weights(ProductSpace((2, 3)), {(0, 0): "1/2", (1, 1): "1/4", (1, 2): "1/4"})
        assert is_maximizer(p)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_verdict_agrees_with_bound(self, seed):
        # random interior points never maximize; maximizers always hit the bound
        p = random_distribution(ProductSpace((2, 3)), np.random.default_rng(seed))
        assert is_maximizer(p) == (multi_information(p) >= upper_bound(p.space) - 1e-12)

    def test_perturbation_flips(self):
        p = construct_maximizer(ProductSpace((2, 2, 4))).to_float()
        q = p.probs.copy()
        k = int(p.support()[0])
        q[k] *= 0.99
        q /= q.sum()
        assert not is_maximizer(Distribution(p.space, q))

    def test_witness_json(self):
        w = find_witness(construct_maximizer(ProductSpace((2, 2))))
        assert w.to_dict() == {"pi": [[0, 1]], "base": ["1/2", "1/2"], "units": [0, 1]}

    def test_invalid_family(self):
        space = ProductSpace((2, 3))
        base = Distribution.from_weights(ProductSpace((3,)), {(0,): "1/2", (1,): "1/2"})
        assert not SurjectionFamily(space, (0, 1), ((0, 0, 1),), base).is_valid()


class TestExhaustive:
    @pytest.mark.parametrize(
        "cards, expected",
        [((2, 2), True), ((2, 3), True), ((3, 3), True), ((2, 3, 3), False), ((2, 3, 4), True),
         ((2, 3, 6), True), ((3, 3, 3), True), ((2, 2, 2), True), ((3, 4, 5), False), ((3, 4, 6), True)],
    )
    def test_small_cases(self, cards, expected):
        space = ProductSpace(cards)
        assert exists_maximizer_exhaustive(space) is expected
        assert scipy_exists(space) is expected
        assert maximizer_exists(space) is expected

    def test_witness_is_valid(self):
        w = find_maximizer_exhaustive(ProductSpace((2, 3, 5)))
        assert w.is_valid()
        p = w.to_distribution()
        assert multi_information(p) == pytest.approx(math.log(6), abs=1e-12)

    def test_budget(self):
        with pytest.raises(BudgetError):
            exists_maximizer_exhaustive(ProductSpace((4, 4, 8)))
        with pytest.raises(BudgetError):
            exists_maximizer_exhaustive(ProductSpace((2, 9)))


class TestExactLP:
    def test_feasible(self):
        x = feasible_point([[1, 1, 0], [0, 1, 1]], [Fraction(1), Fraction(1, 2)])
        assert x is not None and x[0] + x[1] == 1 and x[1] + x[2] == Fraction(1, 2)
        assert all(v >= 0 for v in x)

    def test_infeasible(self):
        assert feasible_point([[1, 1], [1, 1]], [Fraction(1), Fraction(2)]) is None

    def test_negative_rhs(self):
        x = feasible_point([[1, -1]], [Fraction(-1)])
        assert x is not None and x[0] - x[1] == -1


class TestEqualUnits:
    @pytest.mark.parametrize("n, N", [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)])
    def test_census(self, n, N):
        ps = enumerate_equal_unit_maximizers(n, N)
        assert len(ps) == count_equal_unit_maximizers(n, N) == math.factorial(n) ** (N - 1)
        assert len(set(ps)) == len(ps)
        for p in ps:
            assert len(p.support()) == n
            assert multi_information(p) == pytest.approx((N - 1) * math.log(n), abs=1e-12)
            assert is_maximizer(p)

    def test_cap(self):
        with pytest.raises(BudgetError):
            enumerate_equal_unit_maximizers(3, 3, cap=35)


class TestThresholdBounds:
    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(2, 12), min_size=1, max_size=4))
    def test_equality_cases(self, cards):
        cards = sorted(cards)
        b = n_min_bounds(cards)
        nm = n_min(cards)
        assert (nm == b["max"]) == (b["lcm"] == cards[-1])
        assert (nm == b["lcm"]) == (b["lcm"] == cards[-1])
        coprime = all(math.gcd(a, c) == 1 for a, c in itertools.combinations(cards, 2))
        assert (nm == b["coprime"]) == coprime

    @pytest.mark.parametrize("cards", [(2, 3, 6), (2, 2, 4), (3, 4, 7), (2, 4, 8)])
    def test_hub_pairs_are_maximal(self, cards):
        p = construct_maximizer(ProductSpace(cards))
        for i in range(len(cards) - 1):
            assert pair_mutual_information(p, i, len(cards) - 1) == pytest.approx(math.log(cards[i]), abs=1e-12)

    @pytest.mark.parametrize("cards", [(2, 4, 4), (2, 4, 8), (2, 2, 6), (3, 3, 3, 3)])
    def test_divisor_chains_maximize_every_pair(self, cards):
        p = construct_maximizer(ProductSpace(cards))
        for i, j in itertools.combinations(range(len(cards)), 2):
            expected = math.log(min(cards[i], cards[j]))
            assert pair_mutual_information(p, i, j) == pytest.approx(expected, abs=1e-12)

    def test_lcm_hub_without_divisor_chain(self):
        # LCM(2, 3) = 6 is the hub, yet the first pair carries only 2/3 ln 2:
        # a uniform three-valued variable cannot determine a uniform bit
        p = construct_maximizer(ProductSpace((2, 3, 6)))
        assert pair_mutual_information(p, 0, 1) == pytest.approx(2 / 3 * math.log(2), abs=1e-12)
