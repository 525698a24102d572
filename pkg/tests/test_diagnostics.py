import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import SMALL_LIBRARY, lottery
from rrmtools.data_manage.dataset import Dataset
from rrmtools.data_manage.synthetic import GeneratorConfig, generate_synthetic
from rrmtools.diagnostics import BenchmarkScores, ablate, completeness, comparative_statics, concentration, \
    crossfit_topk, decomposition_stability, placebo_comparison, restrictiveness, top_families, top_rules
from rrmtools.diagnostics.crossfit import retention
from rrmtools.errors import DegenerateDenominator, LengthMismatch, NotSimplex, ValidationError
from rrmtools.evaluation import ConstantModel, LookupTableModel, RuleGatingModel, SplitPlan
from rrmtools.features.matrix import feature_matrix
from rrmtools.gate import GateParams, TrainConfig
from rrmtools.lottery import Menu
from rrmtools.rules import ALL_RULES, RuleId, build_rule_matrix

QUICK = TrainConfig(epochs=100)


def gating_model(dataset: Dataset, rules=SMALL_LIBRARY, config: TrainConfig = QUICK) -> RuleGatingModel:
    return RuleGatingModel(build_rule_matrix(dataset.menus, rules=rules), feature_matrix(dataset), config)


class TestConcentration:
    def test_uniform(self):
        report = concentration(np.full(12, 1 / 12), ALL_RULES)
        assert report.hhi == pytest.approx(1 / 12)
        assert report.n_eff == pytest.approx(12)
        assert report.as_dict()["weights"]["SAL"] == pytest.approx(1 / 12)

    def test_point_mass(self):
        report = concentration([0.0, 1.0, 0.0])
        assert report.hhi == 1.0 and report.n_eff == 1.0

    @pytest.mark.parametrize("weights", [[0.5, 0.4], [1.2, -0.2], [], [np.nan, 1.0]])
    def test_rejects_off_simplex(self, weights):
        with pytest.raises(NotSimplex):
            concentration(weights)


class TestCompleteness:
    def test_endpoints(self):
        assert completeness(0.02215) == pytest.approx(0.0)
        assert completeness(0.01139) == pytest.approx(1.0)
        assert completeness(0.01168) == pytest.approx((0.02215 - 0.01168) / (0.02215 - 0.01139))

    def test_can_exceed_unit_interval(self):
        bench = BenchmarkScores(baseline_mse=0.02, flexible_mse=0.01)
        assert completeness(0.005, bench) == pytest.approx(1.5)
        assert completeness(0.03, bench) == pytest.approx(-1.0)

    def test_degenerate_gap(self):
        with pytest.raises(DegenerateDenominator):
            completeness(0.01, BenchmarkScores(baseline_mse=0.01, flexible_mse=0.01))


class TestRestrictiveness:
    def test_constant_model_scores_one(self, noisy_dataset):
        report = restrictiveness(noisy_dataset, ConstantModel(), SplitPlan(n_splits=3), 0.01, permutations=2)
        assert report.ratio == 1.0
        assert report.sd == 0.0
        assert report.n_splits == 3 and report.permutations == 2

    def test_lookup_table_interpolates(self, noisy_dataset):
        report = restrictiveness(noisy_dataset, LookupTableModel(), SplitPlan(n_splits=2), 0.01, permutations=2)
        assert report.ratio == 0.0

    def test_gate_cannot_fit_noise(self, noisy_dataset):
        model = gating_model(noisy_dataset)
        report = restrictiveness(noisy_dataset, model, SplitPlan(n_splits=2), 0.05, permutations=2)
        assert 0.5 < report.ratio < 1.5

    def test_validation(self, noisy_dataset):
        with pytest.raises(ValidationError):
            restrictiveness(noisy_dataset, ConstantModel(), SplitPlan(n_splits=2), 0.01, permutations=0)


def _equal_floor_dataset(n: int = 40, seed: int = 2) -> Dataset:
    rng = np.random.default_rng(seed)
    menus = []
    for i in range(n):
        x, y = rng.choice(np.arange(1, 30), size=2, replace=False)
        menus.append(Menu(f"m{i}", lottery((0, 0.5), (x, 0.5)), lottery((0, 0.4), (y, 0.6)),
                          choice_rate=float(np.clip(0.5 + 0.02 * (x - y) + rng.normal(0, 0.05), 0, 1))))
    return Dataset.build("floor", menus)


class TestAblation:
    def test_never_active_rule_has_no_effect(self):
        dataset = _equal_floor_dataset()
        model = gating_model(dataset)
        assert not model.matrix.active[:, model.matrix.column(RuleId.MMn)].any()

        report = ablate(dataset, model, SplitPlan(n_splits=3), 0.05, rules=[RuleId.MMn, RuleId.MMx])
        never, informative = report.entries
        assert never.rule == RuleId.MMn
        assert never.phi == pytest.approx(0.0, abs=1e-6)
        assert len(never.fold_delta) == 3
        assert informative.rule == RuleId.MMx
        assert len(report.fold_weights) == 3
        assert report.fold_phi(RuleId.MMn) == pytest.approx([0.0] * 3, abs=1e-6)

    def test_attention_rules_cannot_be_dropped(self, noisy_dataset):
        model = gating_model(noisy_dataset)
        with pytest.raises(ValidationError):
            ablate(noisy_dataset, model, SplitPlan(n_splits=2), 0.05, rules=[RuleId.A1])
        with pytest.raises(ValidationError):
            ablate(noisy_dataset, model, SplitPlan(n_splits=2), 0.05, rules=[RuleId.SAL])

    def test_default_drops_every_decision_rule(self, noisy_dataset):
        report = ablate(noisy_dataset, gating_model(noisy_dataset), SplitPlan(n_splits=2), 0.05)
        assert [entry.rule for entry in report.entries] == [RuleId.MMn, RuleId.MMx]
        assert report.n_eff >= 1.0

        stability = decomposition_stability(report.rules, report.fold_weights, report)
        assert set(stability.phi_mean) == {"MMn", "MMx"}
        assert len(stability.rows()) == len(SMALL_LIBRARY)


class TestStatics:
    def test_constant_gate_gives_flat_latent_weights(self, small_menus):
        dataset = Dataset.build("small", small_menus)
        matrix = build_rule_matrix(dataset.menus)
        params = GateParams.zeros(ALL_RULES, ("z_1",))
        report = comparative_statics(params, dataset, np.zeros((6, 1)), matrix, "tc", k_bins=3)
        assert_allclose(report.latent[report.counts > 0], 1 / 12)
        assert report.counts.sum() == 6 and report.n_excluded == 0
        assert np.all(np.diff(report.bin_means) > 0)
        assert_allclose(np.nansum(report.effective, axis=1)[report.counts > 0], 1.0)
        assert len(report.long_rows()) == 2 * 12 * len(report.counts)

    def test_unknown_covariate(self, small_menus):
        dataset = Dataset.build("small", small_menus)
        with pytest.raises(ValueError):
            comparative_statics(GateParams.zeros(ALL_RULES, ("z_1",)), dataset, np.zeros((6, 1)),
                                build_rule_matrix(dataset.menus), "payoff")


class TestCrossfit:
    def test_top_rules(self):
        rules = (RuleId.MMn, RuleId.SAL, RuleId.REG, RuleId.A1)
        assert top_rules(rules, np.array([0.1, 0.4, 0.1, 0.4]), 2) == (RuleId.SAL, RuleId.A1)
        assert top_rules(rules, np.array([0.2, 0.4, 0.2, 0.2]), 2) == (RuleId.MMn, RuleId.SAL)

    def test_top_families(self):
        rules = (RuleId.MMn, RuleId.MMx, RuleId.SAL, RuleId.A1, RuleId.A2)
        weights = np.array([0.1, 0.1, 0.3, 0.25, 0.25])
        assert top_families(rules, weights, 1) == (RuleId.A1, RuleId.A2)
        assert top_families(rules, weights, 2) == (RuleId.SAL, RuleId.A1, RuleId.A2)

    def test_retention(self):
        assert retention(0.01, 0.01) == 100.0
        assert retention(0.011, 0.01) == pytest.approx(90.0)

    def test_full_library_matches_full_fit(self, noisy_dataset):
        report = crossfit_topk(noisy_dataset, gating_model(noisy_dataset), SplitPlan(n_splits=2), 0.05,
                               ks=(2, 4), family_ks=(1,))
        labels = [row.label for row in report.rows]
        assert labels == ["top-2", "top-4", "families-1"]
        full_row = report.rows[1]
        assert full_row.mean_test_mse == report.full_mse
        assert full_row.retention == 100.0
        assert report.rows[0].mean_rules == 2
        assert all(freq == 1.0 for freq in report.frequencies["top-4"].values())
        assert len(report.frequency_rows()) == len(SMALL_LIBRARY)

    def test_k_range(self, noisy_dataset):
        with pytest.raises(ValidationError):
            crossfit_topk(noisy_dataset, gating_model(noisy_dataset), SplitPlan(n_splits=2), 0.05, ks=(5,))


class TestStability:
    def test_identical_folds(self):
        weights = [[0.5, 0.3, 0.2]] * 3
        report = decomposition_stability(SMALL_LIBRARY[:3], weights)
        assert report.spearman_mean == pytest.approx(1.0)
        assert_allclose(report.sd, 0.0, atol=1e-12)
        assert report.phi_mean is None

    def test_validation(self):
        with pytest.raises(ValidationError):
            decomposition_stability(SMALL_LIBRARY[:2], [[0.5, 0.5]])
        with pytest.raises(LengthMismatch):
            decomposition_stability(SMALL_LIBRARY[:2], [[0.2, 0.3, 0.5], [0.2, 0.3, 0.5]])


def test_placebo_comparison(noisy_dataset):
    report = placebo_comparison(noisy_dataset, gating_model(noisy_dataset), SplitPlan(n_splits=2), 0.05,
                                strata=2, seed=1)
    assert report.strata == 2 and report.seed == 1
    assert report.mean_difference == pytest.approx(report.placebo_mse - report.real_mse)


@pytest.mark.slow
def test_gate_is_nearly_fully_restrictive(oracle_params):
    config = GeneratorConfig(n_cells=10, menus_per_cell=30, max_support=3)
    dataset = generate_synthetic(oracle_params, config, n_trials=100, seed=4)
    model = gating_model(dataset, config=TrainConfig(epochs=1000))
    report = restrictiveness(dataset, model, SplitPlan(n_splits=3), 0.05, permutations=2)
    assert 0.85 <= report.ratio <= 1.05
