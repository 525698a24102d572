from rrmtools.rules.rule_id import ALL_RULES, ATTENTION_RULES, FAMILY_OF, RuleFamily, RuleId, parse_rule_list, \
    rules_in_families, sort_rules
from rrmtools.rules.rule import DecisionRule, RuleFactory, RuleOutcome, evaluate_rule
from rrmtools.rules.rule_matrix import RuleMatrix, big_m_for, build_rule_matrix
from rrmtools.rules.coverage import RuleCoverage, rule_coverage, two_sided_mask
from rrmtools.rules.placebo import placebo_permute
from rrmtools.rules.snapshot import read_rule_matrix_csv, write_rule_matrix_csv
from rrmtools.rules.activity import ActivityPoint, activity_sweep, side_agreement
