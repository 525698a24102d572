import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import lottery, random_lottery, sure
from rrmtools.errors import LengthMismatch, NegativeProbability, ProbabilityNotNormalized, ValidationError, ZeroMass
from rrmtools.lottery import DominanceResult, Lottery, Menu, canonicalize, contrast, fsd_compare, mode, \
    product_arrays, product_state_space, survival, weighted_median

LEFT, RIGHT = DominanceResult.LEFT_STRICT, DominanceResult.RIGHT_STRICT
EQUIVALENT, INCOMPARABLE = DominanceResult.EQUIVALENT, DominanceResult.INCOMPARABLE


class TestCanonicalize:
    def test_merges_equal_payoffs(self):
        lot = canonicalize([1, 1, 2], [0.25, 0.25, 0.5])
        assert lot.outcomes == (1.0, 2.0)
        assert_allclose(lot.probs, [0.5, 0.5])

    def test_single_outcome_unchanged(self):
        assert canonicalize([5], [1.0]) == Lottery((5.0,), (1.0,))

    def test_sorts_outcomes(self):
        lot = canonicalize([3, 1], [0.4, 0.6])
        assert lot.outcomes == (1.0, 3.0)
        assert_allclose(lot.probs, [0.6, 0.4])

    def test_drops_zero_probability_payoffs(self):
        lot = canonicalize([0, 7, 9], [0.5, 0.0, 0.5])
        assert lot.outcomes == (0.0, 9.0)

    def test_renormalizes_small_drift(self):
        lot = canonicalize([0, 1], [0.5, 0.5000001])
        assert sum(lot.probs) == pytest.approx(1.0, abs=1e-15)

    def test_idempotent(self, rng):
        for _ in range(50):
            lot = random_lottery(rng)
            assert canonicalize(lot.outcomes, lot.probs) == lot

    @pytest.mark.parametrize("outcomes, probs, error", [
        ([1, 2], [1.0], LengthMismatch),
        ([], [], LengthMismatch),
        ([1, 2], [1.2, -0.2], NegativeProbability),
        ([1, 2], [0.0, 0.0], ZeroMass),
        ([1, 2], [0.3, 0.3], ProbabilityNotNormalized),
        ([1, np.nan], [0.5, 0.5], ValidationError),
    ])
    def test_rejects_invalid_input(self, outcomes, probs, error):
        with pytest.raises(error):
            canonicalize(outcomes, probs)

    def test_moments(self):
        lot = lottery((0, 0.5), (2, 0.5))
        assert lot.expected_value() == pytest.approx(1.0)
        assert lot.variance() == pytest.approx(1.0)
        assert lot.skewness() == pytest.approx(0.0)
        assert sure(3).skewness() == 0.0


class TestFsdCompare:
    def test_degenerate_dominance(self):
        assert fsd_compare(sure(1), sure(0)) == LEFT
        assert fsd_compare(sure(0), sure(1)) == RIGHT

    def test_spread_against_sure_midpoint_is_incomparable(self):
        assert fsd_compare(lottery((0, 0.5), (2, 0.5)), sure(1)) == INCOMPARABLE

    def test_shift_of_upper_branch_dominates(self):
        assert fsd_compare(lottery((0, 0.5), (2, 0.5)), lottery((0, 0.5), (1, 0.5))) == LEFT

    def test_identical_lotteries_are_equivalent(self):
        lot = lottery((0, 0.3), (4, 0.7))
        assert fsd_compare(lot, lot) == EQUIVALENT

    def test_survival_on_grid(self):
        assert_allclose(survival(lottery((0, 0.5), (2, 0.5)), np.array([0.0, 1.0, 2.0])), [1.0, 0.5, 0.5])
        assert_allclose(survival(sure(1), np.array([0.0, 1.0, 2.0])), [1.0, 1.0, 0.0])

    def test_epsilon_requires_a_large_enough_gap(self):
        a, b = lottery((0, 0.5), (2, 0.5)), lottery((0, 0.55), (2, 0.45))
        assert fsd_compare(a, b, 0.0) == LEFT
        assert fsd_compare(a, b, 0.05) == LEFT
        assert fsd_compare(a, b, 0.06) == INCOMPARABLE

    def test_antisymmetry(self, rng):
        swap = {LEFT: RIGHT, RIGHT: LEFT, EQUIVALENT: EQUIVALENT, INCOMPARABLE: INCOMPARABLE}
        for _ in range(500):
            a, b = random_lottery(rng), random_lottery(rng)
            assert fsd_compare(b, a) == swap[fsd_compare(a, b)]

    def test_transitivity(self, rng):
        for _ in range(2000):
            a, b, c = (random_lottery(rng, max_support=2, low=0, high=3) for _ in range(3))
            if fsd_compare(a, b) == LEFT and fsd_compare(b, c) == LEFT:
                assert fsd_compare(a, c) == LEFT

    def test_epsilon_monotone(self, rng):
        for _ in range(500):
            a, b = random_lottery(rng, max_support=3), random_lottery(rng, max_support=3)
            if fsd_compare(a, b, 0.2).is_strict:
                assert fsd_compare(a, b, 0.05) == fsd_compare(a, b, 0.2)

    def test_matches_brute_force_cdf_oracle(self, rng):
        def oracle(a: Lottery, b: Lottery) -> DominanceResult:
            grid = sorted(set(a.outcomes) | set(b.outcomes))
            cdf_a = [sum(p for x, p in zip(a.outcomes, a.probs) if x <= z) for z in grid]
            cdf_b = [sum(p for x, p in zip(b.outcomes, b.probs) if x <= z) for z in grid]
            diff = [fb - fa for fa, fb in zip(cdf_a, cdf_b)]
            if all(abs(d) <= 1e-12 for d in diff):
                return EQUIVALENT
            if all(d >= -1e-12 for d in diff):
                return LEFT
            if all(d <= 1e-12 for d in diff):
                return RIGHT
            return INCOMPARABLE

        for _ in range(10_000):
            a, b = random_lottery(rng, max_support=3, low=-3, high=3), random_lottery(rng, max_support=3, low=-3, high=3)
            assert fsd_compare(a, b) == oracle(a, b)


class TestNumeric:
    def test_contrast(self):
        assert contrast(3, 1) == pytest.approx(0.4)
        assert contrast(1, 3) == contrast(3, 1)
        assert contrast(7.5, 7.5) == 0.0
        assert contrast(0, 0) == 0.0
        assert 0.0 <= contrast(-100, 100) < 1.0

    def test_product_state_space(self):
        assert product_state_space(sure(1), sure(2)) == [(1.0, 2.0, 1.0)]
        triples = product_state_space(lottery((0, 0.3), (1, 0.7)), lottery((2, 0.5), (3, 0.5)))
        assert [(x, y) for x, y, _ in triples] == [(0, 2), (0, 3), (1, 2), (1, 3)]
        assert_allclose([p for _, _, p in triples], [0.15, 0.15, 0.35, 0.35])

    def test_product_arrays_match_state_space(self):
        a, b = lottery((0, 0.3), (1, 0.7)), lottery((2, 0.5), (3, 0.25), (4, 0.25))
        xa, xb, p = product_arrays(a, b)
        triples = product_state_space(a, b)
        assert_allclose(np.column_stack([xa, xb, p]), np.array(triples))

    @pytest.mark.parametrize("values, weights, expected", [
        ([1, 2, 3], [1, 1, 1], 2),
        ([0, 10], [0.9, 0.1], 0),
        ([1, 2], [0.5, 0.5], 1),
        ([3, 1, 2], [1, 1, 1], 2),
        ([5, 4], [0.0, 1.0], 4),
    ])
    def test_weighted_median(self, values, weights, expected):
        assert weighted_median(values, weights) == expected

    def test_weighted_median_rejects_bad_weights(self):
        with pytest.raises(LengthMismatch):
            weighted_median([1, 2], [1])
        with pytest.raises(NegativeProbability):
            weighted_median([1, 2], [1, -1])
        with pytest.raises(ZeroMass):
            weighted_median([1, 2], [0, 0])

    def test_mode(self):
        assert mode(lottery((0, 0.3), (5, 0.7))) == 5
        assert mode(lottery((1, 0.5), (2, 0.5))) == 2
        assert mode(sure(-4)) == -4


class TestMenu:
    def test_rejects_rate_outside_unit_interval(self):
        with pytest.raises(ValidationError):
            Menu("bad", sure(1), sure(0), choice_rate=1.5)

    def test_rejects_nonpositive_trials(self):
        with pytest.raises(ValidationError):
            Menu("bad", sure(1), sure(0), choice_rate=0.5, n_trials=0)

    def test_swapped(self):
        menu = Menu("m", sure(1), sure(0), choice_rate=0.8, n_trials=10)
        swapped = menu.swapped()
        assert swapped.left == sure(0) and swapped.right == sure(1)
        assert swapped.choice_rate == pytest.approx(0.2)
        assert menu.support_count() == 2
        assert Menu("m", lottery((-7, 0.5), (3, 0.5)), sure(5)).max_abs_payoff() == 7
