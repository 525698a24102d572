import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import kstest

from rrmtools.data_manage.synthetic import GeneratorConfig, generate_synthetic
from rrmtools.errors import RankDeficientDesign, ValidationError
from rrmtools.estimation import BootstrapConfig, TwoStepConfig, compare_weights, fit_two_step, j_test, \
    second_stage, solve_normalized_qp, two_step_responsibilities, weights_from_rows
from rrmtools.features.matrix import feature_matrix
from rrmtools.gate import responsibilities
from rrmtools.identification import effective_basis
from rrmtools.rules import RuleId, build_rule_matrix


class TestFirstStage:
    def test_recovers_weights_from_noiseless_rows(self, rng):
        omega = np.array([0.4, 2.5, 1.0, 0.7])
        projector = np.eye(4) - np.outer(omega, omega) / (omega @ omega)
        h = rng.normal(size=(15, 4)) @ projector
        solution, converged, iterations = solve_normalized_qp(h, baseline_index=2)
        assert converged and iterations == 0
        assert_allclose(solution, omega, atol=1e-6)

    def test_projected_gradient_agrees_with_closed_form(self, rng):
        omega = np.array([1.0, 0.5, 3.0])
        projector = np.eye(3) - np.outer(omega, omega) / (omega @ omega)
        h = rng.normal(size=(10, 3)) @ projector
        solution, converged, _ = solve_normalized_qp(h, 0, closed_form_first=False)
        assert converged
        assert_allclose(solution, omega, atol=1e-5)

    def test_zero_system(self):
        weights = weights_from_rows(np.zeros((5, 3)), (RuleId.MMn, RuleId.A1, RuleId.A2), RuleId.A1)
        assert_allclose(weights.omega, 1.0)
        assert weights.residual_norm == 0.0

    def test_binding_floor_is_flagged(self):
        h = np.array([[1.0, 1.0], [2.0, 2.0]])
        weights = weights_from_rows(h, (RuleId.MMn, RuleId.A1), RuleId.A1, floor=1e-3)
        assert weights.omega[0] == pytest.approx(1e-3)
        assert weights.omega[1] == 1.0
        assert weights.active_constraints == (RuleId.MMn,)

    def test_rejects_nonpositive_floor(self):
        with pytest.raises(ValidationError):
            solve_normalized_qp(np.ones((2, 2)), 0, floor=0.0)


class TestSecondStage:
    def test_exact_affine_log_weights(self, rng):
        centroids = rng.normal(size=(8, 2))
        gamma = np.array([[0.5, 1.0, -2.0], [-1.0, 0.3, 0.7]])
        log_weights = np.column_stack([np.ones(8), centroids]) @ gamma.T
        stage = second_stage(log_weights, centroids, effective_basis(centroids))
        assert_allclose(stage.residuals, 0.0, atol=1e-10)
        assert_allclose(stage.design @ stage.gamma.T, log_weights, atol=1e-10)

    def test_exact_inversion_with_minimal_cells(self, rng):
        centroids = rng.normal(size=(3, 2))
        log_weights = rng.normal(size=(3, 4))
        stage = second_stage(log_weights, centroids, effective_basis(centroids))
        assert_allclose(stage.residuals, 0.0, atol=1e-10)

    def test_too_few_cells(self, rng):
        centroids = rng.normal(size=(3, 2))
        basis = effective_basis(rng.normal(size=(20, 2)))
        with pytest.raises(RankDeficientDesign):
            second_stage(rng.normal(size=(2, 1)), centroids[:2], basis)

    def test_j_test(self, rng):
        centroids = rng.normal(size=(10, 2))
        basis = effective_basis(centroids)
        log_weights = np.column_stack([np.ones(10), centroids]) @ np.array([[0.2, 1.0, -1.0]]).T
        log_weights = log_weights + rng.normal(0, 0.1, size=(10, 1))
        (test,) = j_test(log_weights, centroids, basis, np.full((10, 1), 0.01))
        assert test.dof == 7
        assert 0.0 <= test.p_value <= 1.0
        assert not test.ridge_added

        (ridged,) = j_test(log_weights, centroids, basis, np.zeros((10, 1)))
        assert ridged.ridge_added

        with pytest.raises(ValidationError):
            j_test(log_weights[:3], centroids[:3], basis, np.ones((3, 1)))


class TestTwoStep:
    def test_noiseless_recovery(self, noiseless_dataset, oracle_params):
        features = feature_matrix(noiseless_dataset)
        matrix = build_rule_matrix(noiseless_dataset.menus, rules=oracle_params.rules)
        fit = fit_two_step(noiseless_dataset, matrix, features, TwoStepConfig(bootstrap=None),
                           feature_names=oracle_params.feature_names)

        truth = oracle_params.normalized(RuleId.A1)
        assert fit.baseline == RuleId.A1 and fit.n_cells == 6 and fit.d_eff == 2
        assert_allclose(fit.params.alpha, truth.alpha, atol=1e-5)
        assert_allclose(fit.params.beta, truth.beta, atol=1e-5)
        assert_allclose(fit.weights, responsibilities(truth, features, matrix).weights, atol=1e-6)
        assert fit.gamma_se is None and fit.j_tests is None
        assert all(cell.residual_norm < 1e-8 for cell in fit.cells)

    def test_bootstrap_and_j_tests(self, noisy_dataset, oracle_params):
        features = feature_matrix(noisy_dataset)
        matrix = build_rule_matrix(noisy_dataset.menus, rules=oracle_params.rules)
        config = TwoStepConfig(bootstrap=BootstrapConfig(resamples=20, seed=4, scheme="trials"), threads=2)
        fit = fit_two_step(noisy_dataset, matrix, features, config)

        assert fit.gamma_se.shape == (3, 3)
        assert np.all(np.isfinite(fit.gamma_se)) and np.all(fit.gamma_se >= 0)
        assert len(fit.j_tests) == 3
        assert all(test.dof == 6 - 3 for test in fit.j_tests)
        assert all(0.0 <= test.p_value <= 1.0 for test in fit.j_tests)
        assert fit.flags["bootstrap_scheme"] == "trials"

        payload = fit.to_json()
        assert set(payload["gamma"]) == {"MMn", "MMx", "A2"}
        assert len(fit.table_rows(fit.weights)) == 4
        assert fit.table_rows(fit.weights)[0][4] == 0.0

    def test_menu_bootstrap_is_reproducible(self, noisy_dataset, oracle_params):
        features = feature_matrix(noisy_dataset)
        matrix = build_rule_matrix(noisy_dataset.menus, rules=oracle_params.rules)
        config = TwoStepConfig(bootstrap=BootstrapConfig(resamples=10, seed=9))
        a = fit_two_step(noisy_dataset, matrix, features, config)
        b = fit_two_step(noisy_dataset, matrix, features, config)
        assert_allclose(a.gamma_se, b.gamma_se)

    def test_responsibilities_on_other_sample(self, noiseless_dataset, noisy_dataset, oracle_params):
        features = feature_matrix(noiseless_dataset)
        matrix = build_rule_matrix(noiseless_dataset.menus, rules=oracle_params.rules)
        fit = fit_two_step(noiseless_dataset, matrix, features, TwoStepConfig(bootstrap=None))
        other = build_rule_matrix(noisy_dataset.menus, rules=oracle_params.rules)
        report = two_step_responsibilities(fit, feature_matrix(noisy_dataset), other)
        assert report.weights.sum() == pytest.approx(1.0)

    def test_baseline_must_be_in_library(self, noiseless_dataset):
        matrix = build_rule_matrix(noiseless_dataset.menus, rules=[RuleId.MMn, RuleId.A2])
        with pytest.raises(ValidationError):
            fit_two_step(noiseless_dataset, matrix, feature_matrix(noiseless_dataset), TwoStepConfig(bootstrap=None))

    def test_bootstrap_config_validation(self):
        with pytest.raises(ValidationError):
            BootstrapConfig(resamples=1)
        with pytest.raises(ValidationError):
            BootstrapConfig(scheme="cells")


def test_compare_weights():
    agreement = compare_weights(np.array([0.1, 0.2, 0.3, 0.4]), np.array([0.15, 0.25, 0.2, 0.4]))
    assert agreement.spearman == pytest.approx(0.8)
    assert compare_weights(np.array([0.1, 0.5, 0.4]), np.array([0.1, 0.5, 0.4])).pearson == pytest.approx(1.0)


@pytest.mark.slow
def test_two_step_is_consistent_as_trials_grow(oracle_params):
    config = GeneratorConfig(n_cells=8, menus_per_cell=30, max_support=3)
    truth = oracle_params.normalized(RuleId.A1)
    errors = []
    for n_trials in (200, 20000):
        dataset = generate_synthetic(oracle_params, config, n_trials=n_trials, seed=21)
        features = feature_matrix(dataset)
        matrix = build_rule_matrix(dataset.menus, rules=oracle_params.rules)
        fit = fit_two_step(dataset, matrix, features, TwoStepConfig(n_cells=8, bootstrap=None))
        errors.append(np.abs(fit.weights - responsibilities(truth, features, matrix).weights).max())
    assert errors[1] < errors[0]
    assert errors[1] < 0.02


def _j_p_values(params, reps: int, curvature: float = 0.0) -> np.ndarray:
    config = GeneratorConfig(n_cells=13, menus_per_cell=20, max_support=3, curvature=curvature)
    p_values = []
    for rep in range(reps):
        dataset = generate_synthetic(params, config, n_trials=10_000, seed=1000 + rep)
        matrix = build_rule_matrix(dataset.menus, rules=params.rules)
        boot = BootstrapConfig(resamples=100, seed=rep, scheme="trials")
        fit = fit_two_step(dataset, matrix, feature_matrix(dataset), TwoStepConfig(n_cells=13, bootstrap=boot))
        assert fit.j_tests is not None and all(test.dof == 10 for test in fit.j_tests)
        p_values += [test.p_value for test in fit.j_tests]
    return np.array(p_values)


@pytest.mark.slow
def test_j_test_is_calibrated_under_affine_gate(oracle_params):
    p_values = _j_p_values(oracle_params, reps=100)
    assert kstest(p_values, "uniform").statistic < 0.1


@pytest.mark.slow
def test_j_test_rejects_quadratic_gate(oracle_params):
    p_values = _j_p_values(oracle_params, reps=20, curvature=1.0)
    assert np.mean(p_values < 0.05) > 0.8
