import numpy as np
import pytest

from conftest import lottery, random_menus, sure
from rrmtools.errors import EmptyDataset, StrataTooFine
from rrmtools.lottery import Menu
from rrmtools.rules import ALL_RULES, RuleFamily, RuleId, RuleOutcome, activity_sweep, big_m_for, build_rule_matrix, \
    evaluate_rule, parse_rule_list, placebo_permute, read_rule_matrix_csv, rule_coverage, rules_in_families, \
    side_agreement, sort_rules, two_sided_mask, write_rule_matrix_csv

BIG_M = 1000.0


def outcome(rule: RuleId, menu: Menu, epsilon: float = 0.0) -> RuleOutcome:
    return evaluate_rule(rule, menu, epsilon, BIG_M)


class TestRuleId:
    def test_canonical_order(self):
        assert [rule.value for rule in ALL_RULES] == ["MMn", "MMa", "MMx", "MAP", "SAL", "SAL2", "REG", "REGmed",
                                                      "DIS", "DISmed", "A1", "A2"]
        assert RuleId.A2.index == 11

    def test_parse_rule_list_sorts_and_dedups(self):
        assert parse_rule_list("A1, MMn,A1") == (RuleId.MMn, RuleId.A1)
        assert parse_rule_list("") == ()
        with pytest.raises(ValueError, match="Unknown rule"):
            parse_rule_list("MMn,XYZ")

    def test_families(self):
        assert rules_in_families([RuleFamily.REGRET]) == (RuleId.REG, RuleId.REGmed)
        assert RuleId.A1.is_attention and not RuleId.SAL.is_attention
        assert sort_rules([RuleId.A2, RuleId.MMn]) == (RuleId.MMn, RuleId.A2)

    def test_inactive_rule_cannot_recommend_left(self):
        with pytest.raises(ValueError):
            RuleOutcome(active=False, left=True)


class TestEvaluateRule:
    def test_worst_case_rule_prefers_safe_option(self):
        menu = Menu("m", lottery((0, 0.5), (10, 0.5)), sure(1))
        assert outcome(RuleId.MMn, menu) == RuleOutcome(active=True, left=False)
        assert outcome(RuleId.MMx, menu) == RuleOutcome(active=True, left=True)
        assert outcome(RuleId.MMa, menu) == RuleOutcome(active=True, left=True)

    def test_attention_rules_have_fixed_sides(self):
        menu = Menu("m", lottery((-5, 0.5), (10, 0.5)), sure(40))
        assert outcome(RuleId.A1, menu) == RuleOutcome(active=True, left=True)
        assert outcome(RuleId.A2, menu) == RuleOutcome(active=True, left=False)

    def test_mode_rule_breaks_ties_upward(self):
        menu = Menu("m", lottery((1, 0.5), (2, 0.5)), sure(1.5))
        assert outcome(RuleId.MAP, menu) == RuleOutcome(active=True, left=True)

    def test_disappointment_inactive_on_sure_options(self):
        menu = Menu("m", sure(3), sure(1))
        assert not outcome(RuleId.DIS, menu).active
        assert not outcome(RuleId.DISmed, menu).active

    def test_disappointment_penalizes_downside(self):
        menu = Menu("m", lottery((0, 0.2), (10, 0.8)), sure(5))
        assert outcome(RuleId.DIS, menu) == RuleOutcome(active=True, left=False)

    def test_salience_tie_takes_first_pairing(self):
        # pairings (-2, 0) and (2, 0) share the top contrast; the first one listed wins
        menu = Menu("m", lottery((-2, 0.5), (2, 0.5)), sure(0))
        assert outcome(RuleId.SAL, menu) == RuleOutcome(active=True, left=False)
        assert not outcome(RuleId.SAL2, menu).active

    def test_regret_rules(self):
        menu = Menu("m", lottery((0, 0.9), (100, 0.1)), sure(5))
        # regret of left is 5 with prob 0.9; regret of right is 95 with prob 0.1
        assert outcome(RuleId.REGmed, menu) == RuleOutcome(active=True, left=False)
        assert not outcome(RuleId.REG, menu).active

    def test_sure_gain_against_sure_loss(self):
        matrix = build_rule_matrix([Menu("m", sure(1), sure(0))])
        for rule in (RuleId.MMn, RuleId.MMa, RuleId.MMx, RuleId.MAP, RuleId.SAL, RuleId.REG, RuleId.REGmed,
                     RuleId.A1):
            assert matrix.outcome(0, rule) == RuleOutcome(active=True, left=True), rule
        for rule in (RuleId.SAL2, RuleId.DIS, RuleId.DISmed):
            assert not matrix.outcome(0, rule).active, rule
        assert matrix.outcome(0, RuleId.A2) == RuleOutcome(active=True, left=False)

    def test_negative_epsilon_activates_every_rule(self):
        menu = Menu("m", lottery((0, 0.5), (2, 0.5)), lottery((0, 0.5), (2, 0.5)))
        assert not outcome(RuleId.MMn, menu).active
        assert outcome(RuleId.MMn, menu, epsilon=-1.0) == RuleOutcome(active=True, left=False)

    def test_swapping_sides_flips_decisive_rules(self, rng):
        for menu in random_menus(rng, 200):
            for rule in ALL_RULES:
                if rule.is_attention or rule in (RuleId.SAL, RuleId.SAL2):
                    continue
                a, b = outcome(rule, menu), outcome(rule, menu.swapped())
                assert a.active == b.active
                if a.active:
                    assert a.left != b.left


class TestRuleMatrix:
    def test_empty_input(self):
        with pytest.raises(EmptyDataset):
            build_rule_matrix([])

    def test_invariants_on_random_menus(self, rng):
        matrix = build_rule_matrix(random_menus(rng, 300), threads=2)
        assert not np.any(matrix.left & ~matrix.active)
        a1, a2 = matrix.column(RuleId.A1), matrix.column(RuleId.A2)
        assert matrix.active[:, a1].all() and matrix.left[:, a1].all()
        assert matrix.active[:, a2].all() and not matrix.left[:, a2].any()
        assert two_sided_mask(matrix).all()

    def test_big_m_exceeds_every_payoff(self, small_menus):
        assert big_m_for(small_menus) == 10 * 10 + 1
        assert build_rule_matrix(small_menus).big_m == 101.0

    def test_threads_do_not_change_result(self, rng):
        menus = random_menus(rng, 80)
        one, many = build_rule_matrix(menus, threads=1), build_rule_matrix(menus, threads=4)
        assert np.array_equal(one.active, many.active) and np.array_equal(one.left, many.left)

    def test_select_and_drop(self, small_menus):
        matrix = build_rule_matrix(small_menus)
        reduced = matrix.select([RuleId.A2, RuleId.MMn])
        assert reduced.rules == (RuleId.MMn, RuleId.A2)
        assert np.array_equal(reduced.active[:, 0], matrix.active[:, matrix.column(RuleId.MMn)])
        assert RuleId.SAL not in matrix.drop([RuleId.SAL]).rules
        assert matrix.take(np.array([2, 0])).menu_ids == ("m3", "m1")
        with pytest.raises(ValueError):
            reduced.select([RuleId.SAL])

    def test_activity_shrinks_with_epsilon(self, rng):
        menus = random_menus(rng, 200)
        previous = build_rule_matrix(menus, epsilon=0.0)
        for epsilon in (0.01, 0.05, 0.1, 0.3):
            current = build_rule_matrix(menus, epsilon=epsilon)
            assert not np.any(current.active & ~previous.active)
            previous = current

    def test_snapshot_round_trip(self, small_menus, tmp_path):
        matrix = build_rule_matrix(small_menus)
        path = tmp_path / "rules.csv"
        write_rule_matrix_csv(matrix, path)
        restored = read_rule_matrix_csv(path, matrix.epsilon, matrix.big_m)
        assert restored.menu_ids == matrix.menu_ids and restored.rules == matrix.rules
        assert np.array_equal(restored.active, matrix.active) and np.array_equal(restored.left, matrix.left)

    def test_coverage(self, small_menus):
        matrix = build_rule_matrix(small_menus)
        coverage = {row.rule: row for row in rule_coverage(matrix)}
        assert coverage["A1"].pr_active == 1.0 and coverage["A1"].pr_left_given_active == 1.0
        assert not coverage["A1"].switches_sides
        assert coverage["MMn"].n_active == int(matrix.active[:, matrix.column(RuleId.MMn)].sum())


class TestPlacebo:
    def test_preserves_counts_and_attention_columns(self, rng):
        menus = random_menus(rng, 120)
        matrix = build_rule_matrix(menus)
        placebo = placebo_permute(matrix, menus, strata=3, seed=7)
        assert placebo.activity_counts() == matrix.activity_counts()
        assert np.array_equal(placebo.kappa_left.sum(axis=0), matrix.kappa_left.sum(axis=0))
        for rule in (RuleId.A1, RuleId.A2):
            j = matrix.column(rule)
            assert np.array_equal(placebo.active[:, j], matrix.active[:, j])
        assert not np.any(placebo.left & ~placebo.active)

    def test_same_seed_same_placebo(self, rng):
        menus = random_menus(rng, 60)
        matrix = build_rule_matrix(menus)
        a, b = placebo_permute(matrix, menus, 2, seed=1), placebo_permute(matrix, menus, 2, seed=1)
        assert np.array_equal(a.active, b.active) and np.array_equal(a.left, b.left)

    def test_strata_too_fine(self):
        menus = [Menu("a", sure(1), sure(0)),
                 Menu("b", lottery((0, 0.5), (1, 0.5)), sure(0)),
                 Menu("c", lottery((0, 0.5), (1, 0.5)), lottery((0, 0.5), (1, 0.5)))]
        with pytest.raises(StrataTooFine):
            placebo_permute(build_rule_matrix(menus), menus, strata=3)


class TestActivity:
    def test_sweep_is_monotone(self, rng):
        menus = random_menus(rng, 100)
        points = activity_sweep(menus, [0.0, 0.05, 0.2])
        means = [point.mean_active for point in points]
        assert means == sorted(means, reverse=True)
        assert all(point.n_scored == 0 for point in points)

    def test_side_agreement(self):
        menus = [Menu("a", sure(1), sure(0)), Menu("b", sure(1), sure(0)), Menu("c", sure(1), sure(0))]
        matrix = build_rule_matrix(menus, rules=[RuleId.MMn, RuleId.A1, RuleId.A2])
        share, n_scored = side_agreement(matrix, [0.9, 0.2, 0.5])
        # menu a: MMn and A1 agree with left; menu b: only A2 agrees with right; menu c has no majority
        assert n_scored == 2
        assert share == pytest.approx((2 / 3 + 1 / 3) / 2)


# Plain-Python evaluation of every rule, straight from the rule definitions, used as an oracle
# for the vectorized library on a random corpus.
TOL = 1e-10


def _contr(x, y):
    return abs(x - y) / (abs(x) + abs(y) + 1.0)


def _pairs(lot):
    return list(zip(lot.outcomes, lot.probs))


def _mode(lot):
    top = max(lot.probs)
    return max(x for x, p in _pairs(lot) if p >= top - 1e-12)


def _fsd(a, b):
    """+1 when a strictly dominates b, -1 for the converse, 0 otherwise; a and b map payoff -> prob."""
    grid = sorted(set(a) | set(b))
    a_below_b = b_below_a = True
    strict_a = strict_b = False
    for z in grid:
        fa = sum(p for x, p in a.items() if x <= z)
        fb = sum(p for x, p in b.items() if x <= z)
        if fa > fb + TOL:
            a_below_b = False
        if fb > fa + TOL:
            b_below_a = False
        strict_a = strict_a or fb - fa > TOL
        strict_b = strict_b or fa - fb > TOL
    if a_below_b and strict_a:
        return 1
    if b_below_a and strict_b:
        return -1
    return 0


def _sure_compare(x, y):
    return 0 if x == y else (1 if x > y else -1)


def _distribution(values_probs):
    out = {}
    for x, p in values_probs:
        out[x] = out.get(x, 0.0) + p
    return out


def _lower_wmed(values_probs):
    total, cumulative = sum(p for _, p in values_probs), 0.0
    for x, p in sorted(values_probs):
        cumulative += p
        if cumulative >= 0.5 * total - 1e-12:
            return x
    return sorted(values_probs)[-1][0]


def _disappointments(lot):
    peak = _mode(lot)
    return sorted((_contr(peak, z) for z in lot.outcomes if z < peak), reverse=True)


def _dis(lot, median):
    downside = _disappointments(lot)
    if not downside:
        return 0.0
    return downside[1] if median and len(downside) >= 2 else downside[0]


def reference_outcome(rule: RuleId, menu: Menu) -> tuple[bool, bool]:
    left, right = menu.left, menu.right
    if rule == RuleId.A1:
        return True, True
    if rule == RuleId.A2:
        return True, False

    if rule == RuleId.MMn:
        verdict = _sure_compare(left.min, right.min)
    elif rule == RuleId.MMx:
        verdict = _sure_compare(left.max, right.max)
    elif rule == RuleId.MMa:
        verdict = _sure_compare((left.min + left.max) / 2, (right.min + right.max) / 2)
    elif rule == RuleId.MAP:
        verdict = _sure_compare(_mode(left), _mode(right))
    elif rule in (RuleId.SAL, RuleId.SAL2):
        grid = [(left.min, right.min), (left.min, right.max), (left.max, right.min), (left.max, right.max)]
        scores = [_contr(a, b) for a, b in grid]
        ordered = sorted(scores, reverse=True)
        if rule == RuleId.SAL:
            k = scores.index(ordered[0])
        elif ordered[0] == ordered[1]:
            return False, False
        else:
            k = scores.index(ordered[1])
        verdict = _sure_compare(*grid[k])
    elif rule in (RuleId.REG, RuleId.REGmed):
        states = [(x, y, p * q) for x, p in _pairs(left) for y, q in _pairs(right)]
        regret_left = [(max(y - x, 0.0), w) for x, y, w in states]
        regret_right = [(max(x - y, 0.0), w) for x, y, w in states]
        if rule == RuleId.REG:
            verdict = _fsd(_distribution((-d, w) for d, w in regret_left),
                           _distribution((-d, w) for d, w in regret_right))
        else:
            verdict = _sure_compare(-_lower_wmed(regret_left), -_lower_wmed(regret_right))
    else:
        median = rule == RuleId.DISmed
        verdict = _sure_compare(-_dis(left, median), -_dis(right, median))
    return verdict != 0, verdict == 1


class TestAgainstReference:
    def test_indicators_match_on_random_corpus(self):
        menus = random_menus(np.random.default_rng(7), 200)
        matrix = build_rule_matrix(menus, threads=2)
        mismatches = [(menu.id, rule.value)
                      for t, menu in enumerate(menus)
                      for rule in ALL_RULES
                      if (bool(matrix.active[t, rule.index]), bool(matrix.left[t, rule.index]))
                      != reference_outcome(rule, menu)]
        assert mismatches == []

    def test_reference_agrees_on_hand_cases(self):
        menu = Menu("m", lottery((0, 0.9), (100, 0.1)), sure(5))
        assert reference_outcome(RuleId.REGmed, menu) == (True, False)
        assert reference_outcome(RuleId.REG, menu) == (False, False)
        assert reference_outcome(RuleId.SAL2, Menu("s", lottery((-2, 0.5), (2, 0.5)), sure(0))) == (False, False)
