from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from globalog import LOG
from scipy.stats import pearsonr, spearmanr

from rrmtools.common.ext.typing_ext import BoolArray, FloatArray, IntArray
from rrmtools.common.time_measure import DurationMeasure
from rrmtools.common.workers import derive_seeds, map_jobs
from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import MissingTrials, RankDeficientDesign, ValidationError
from rrmtools.estimation.first_stage import DEFAULT_FLOOR, CellWeights, weights_from_rows
from rrmtools.estimation.second_stage import JTest, SecondStage, inverse_variance_weights, j_test, second_stage
from rrmtools.gate import GateParams, ResponsibilityReport, responsibilities
from rrmtools.identification import DEFAULT_TRIM, CellAssignment, FeatureBasis, build_cells, effective_basis, \
    restriction_matrix
from rrmtools.rules import RuleId, RuleMatrix, two_sided_mask

BOOTSTRAP_SCHEMES = ("menus", "trials")


@dataclass(frozen=True)
class BootstrapConfig:
    resamples: int = 100
    seed: int = 0
    scheme: str = "menus"

    def __post_init__(self):
        if self.resamples < 2:
            raise ValidationError(f"bootstrap needs at least 2 resamples, got {self.resamples}")
        if self.scheme not in BOOTSTRAP_SCHEMES:
            raise ValidationError(f"unknown bootstrap scheme {self.scheme!r}, expected one of {BOOTSTRAP_SCHEMES}")


@dataclass(frozen=True)
class TwoStepConfig:
    n_cells: int = 50
    trim: float = DEFAULT_TRIM
    floor: float = DEFAULT_FLOOR
    baseline: str = "A1"
    seed: int = 0
    min_cell_rows: Optional[int] = None
    efficient_weights: bool = False
    bootstrap: Optional[BootstrapConfig] = field(default_factory=BootstrapConfig)
    threads: int = 1

    @property
    def baseline_rule(self) -> RuleId:
        return RuleId.parse(self.baseline)


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything the two steps need, fixed across bootstrap resamples."""
    rules: tuple[RuleId, ...]
    baseline: RuleId
    h: FloatArray
    two_sided: BoolArray
    labels: IntArray
    cell_ids: IntArray
    centroids: FloatArray
    basis: FeatureBasis
    floor: float

    @property
    def free_rules(self) -> tuple[RuleId, ...]:
        return tuple(rule for rule in self.rules if rule != self.baseline)


@dataclass(frozen=True, eq=False)
class Estimate:
    cells: list[CellWeights]
    log_weights: FloatArray
    stage: SecondStage


def estimate(problem: Problem, h: Optional[FloatArray] = None, rows: Optional[IntArray] = None) -> Estimate:
    """
    Both steps on a (possibly resampled) set of menu rows. `rows` indexes the menus to use
    (with repeats); each row keeps its original cell label.
    """
    h = problem.h if h is None else h
    rows = np.arange(len(h)) if rows is None else rows
    labels, two_sided = problem.labels[rows], problem.two_sided[rows]
    cells = []
    for cell_id in problem.cell_ids:
        members = rows[(labels == cell_id) & two_sided]
        if len(members) == 0:
            raise RankDeficientDesign(f"cell {cell_id} lost all its two-sided menus")
        cells.append(weights_from_rows(h[members], problem.rules, problem.baseline, problem.floor, int(cell_id)))
    log_weights = np.vstack([cell.log_weights(problem.baseline) for cell in cells])
    return Estimate(cells, log_weights, second_stage(log_weights, problem.centroids, problem.basis))


def params_from_gamma(gamma: FloatArray, problem: Problem, feature_names: Sequence[str],
                      template: Optional[GateParams] = None, **kwargs) -> GateParams:
    """Normalized gate parameters from second-stage coefficients (baseline row pinned to zero)."""
    alpha = np.zeros(len(problem.rules))
    beta = np.zeros((len(problem.rules), problem.basis.directions.shape[0]))
    for row, rule in zip(gamma, problem.free_rules):
        j = problem.rules.index(rule)
        alpha[j] = row[0]
        beta[j] = problem.basis.lift(row[1:])
    if template is not None:
        return template.with_values(alpha, beta)
    return GateParams(problem.rules, alpha, beta, tuple(feature_names), baseline=problem.baseline, **kwargs)


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    gamma_se: FloatArray
    weights_se: FloatArray
    log_weight_var: FloatArray
    n_resamples: int
    n_failed: int
    scheme: str


def _resampled_rates(rates: FloatArray, trials: IntArray, rng: np.random.Generator) -> FloatArray:
    return rng.binomial(trials, rates) / trials


def bootstrap_se(problem: Problem, dataset: Dataset, matrix: RuleMatrix, features: FloatArray,
                 boot: BootstrapConfig, trim: float, template: GateParams, threads: int = 1) -> BootstrapResult:
    """
    Standard errors of gamma and of w_f across resamples. The `menus` scheme redraws menus with
    replacement, keeping every menu's original cell; the `trials` scheme redraws each menu's choice
    rate from Binomial(n, p_hat) / n with the design held fixed.
    """
    rates = dataset.targets()
    trials = dataset.trial_counts()
    if boot.scheme == "trials" and trials is None:
        raise MissingTrials("the trials bootstrap needs n_trials on every menu")
    n_menus = len(rates)

    def one(seed: int) -> Optional[tuple[FloatArray, FloatArray, FloatArray]]:
        rng = np.random.default_rng(seed)
        try:
            if boot.scheme == "menus":
                result = estimate(problem, rows=rng.integers(0, n_menus, n_menus))
            else:
                h, _ = restriction_matrix(_resampled_rates(rates, trials, rng), matrix, trim)
                result = estimate(problem, h=h)
        except RankDeficientDesign as e:
            LOG.debug(f"bootstrap resample dropped: {e}")
            return None
        params = params_from_gamma(result.stage.gamma, problem, template.feature_names, template)
        weights = responsibilities(params, features, matrix).weights
        return result.stage.gamma, weights, result.log_weights

    with DurationMeasure(action=f"bootstrap ({boot.resamples} resamples, scheme={boot.scheme})"):
        draws = map_jobs(one, derive_seeds(boot.seed, boot.resamples), threads)

    kept = [draw for draw in draws if draw is not None]
    n_failed = len(draws) - len(kept)
    if n_failed:
        LOG.warning(f"{n_failed} of {boot.resamples} bootstrap resamples failed and were dropped")
    if len(kept) < 2:
        raise RankDeficientDesign("fewer than 2 usable bootstrap resamples")

    gammas = np.stack([draw[0] for draw in kept])
    weights = np.stack([draw[1] for draw in kept])
    log_weights = np.stack([draw[2] for draw in kept])
    return BootstrapResult(gammas.std(axis=0, ddof=1), weights.std(axis=0, ddof=1), log_weights.var(axis=0, ddof=1),
                           len(kept), n_failed, boot.scheme)


@dataclass(frozen=True, eq=False)
class TwoStepFit:
    rules: tuple[RuleId, ...]
    baseline: RuleId
    gamma: FloatArray
    gamma_se: Optional[FloatArray]
    j_tests: Optional[list[JTest]]
    responsibilities: ResponsibilityReport
    weights_se: Optional[FloatArray]
    params: GateParams
    cells: list[CellWeights]
    d_eff: int
    flags: dict[str, Any] = field(default_factory=dict)

    @property
    def free_rules(self) -> tuple[RuleId, ...]:
        return tuple(rule for rule in self.rules if rule != self.baseline)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def weights(self) -> FloatArray:
        return self.responsibilities.weights

    @staticmethod
    def table_headers() -> list[str]:
        return ["rule", "w_two_step", "se", "w_mse", "difference", "J", "dof", "p_value"]

    def table_rows(self, mse_weights: Optional[FloatArray] = None) -> list[list]:
        j_by_rule = dict(zip(self.free_rules, self.j_tests or []))
        rows = []
        for j, rule in enumerate(self.rules):
            w = float(self.weights[j])
            se = None if self.weights_se is None else float(self.weights_se[j])
            w_mse = None if mse_weights is None else float(mse_weights[j])
            diff = None if w_mse is None else w - w_mse
            test = j_by_rule.get(rule)
            rows.append([rule.value, w, se, w_mse, diff,
                         None if test is None else test.statistic,
                         None if test is None else test.dof,
                         None if test is None else test.p_value])
        return rows

    def to_json(self) -> dict[str, Any]:
        return {
            "rules": [rule.value for rule in self.rules],
            "baseline": self.baseline.value,
            "d_eff": self.d_eff,
            "n_cells": self.n_cells,
            "gamma": {rule.value: row.tolist() for rule, row in zip(self.free_rules, self.gamma)},
            "gamma_se": None if self.gamma_se is None else
            {rule.value: row.tolist() for rule, row in zip(self.free_rules, self.gamma_se)},
            "j_tests": None if self.j_tests is None else
            {rule.value: vars(test) for rule, test in zip(self.free_rules, self.j_tests)},
            "w_two_step": self.responsibilities.as_dict(),
            "w_se": None if self.weights_se is None else
            {rule.value: float(se) for rule, se in zip(self.rules, self.weights_se)},
            "q_bar": {rule.value: float(q) for rule, q in zip(self.rules, self.responsibilities.latent)},
            "a_bar": {rule.value: float(a) for rule, a in zip(self.rules, self.responsibilities.active_mass)},
            "cells": [{"cell_id": cell.cell_id, "residual_norm": cell.residual_norm, "converged": cell.converged,
                       "at_floor": [rule.value for rule in cell.active_constraints]} for cell in self.cells],
            "flags": self.flags,
            "note": "binning and positivity constraints make this an econometric cross-check of the "
                    "predictive fit rather than an exact finite-cell inference",
        }


def build_problem(dataset: Dataset, matrix: RuleMatrix, features: FloatArray,
                  config: TwoStepConfig) -> tuple[Problem, CellAssignment]:
    h, _ = restriction_matrix(dataset.targets(), matrix, config.trim)
    two_sided = two_sided_mask(matrix)
    min_rows = matrix.n_rules - 1 if config.min_cell_rows is None else config.min_cell_rows
    assignment = build_cells(features, config.n_cells, config.seed, min_rows)
    counts = np.bincount(assignment.labels[two_sided], minlength=assignment.n_cells)
    cell_ids = np.flatnonzero(counts >= min_rows)

    baseline = config.baseline_rule
    if baseline not in matrix.rules:
        raise ValidationError(f"baseline {baseline.value} is not in the library")
    problem = Problem(matrix.rules, baseline, h, two_sided, assignment.labels, cell_ids,
                      assignment.centroids[cell_ids], effective_basis(features), config.floor)
    LOG.info(f"Two-step problem: {len(cell_ids)} of {assignment.n_cells} cells with >= {min_rows} two-sided menus, "
             f"d_eff={problem.basis.d_eff}")
    return problem, assignment


def fit_two_step(dataset: Dataset, matrix: RuleMatrix, features: FloatArray,
                 config: TwoStepConfig = TwoStepConfig(), feature_names: Optional[Sequence[str]] = None) -> TwoStepFit:
    """
    Cellwise constrained least squares for normalized weights, then regression of log-weights on
    cell centroids; bootstrap standard errors and per-rule J-tests when resampling is configured.
    """
    features = np.asarray(features, dtype=np.float64)
    names = tuple(feature_names) if feature_names is not None else tuple(f"z_{i + 1}" for i in range(features.shape[1]))
    problem, _ = build_problem(dataset, matrix, features, config)

    with DurationMeasure(action="two-step point estimate"):
        point = estimate(problem)
    template = params_from_gamma(point.stage.gamma, problem, names, rescale_factor=dataset.rescale_factor,
                                 epsilon=matrix.epsilon)

    flags: dict[str, Any] = {"non_converged_cells": [c.cell_id for c in point.cells if not c.converged],
                             "cells_with_floor": [c.cell_id for c in point.cells if c.active_constraints]}
    boot, j_tests, gamma = None, None, point.stage.gamma
    if config.bootstrap is not None:
        boot = bootstrap_se(problem, dataset, matrix, features, config.bootstrap, config.trim, template,
                            config.threads)
        flags.update(bootstrap_failed=boot.n_failed, bootstrap_scheme=boot.scheme)
        if len(problem.cell_ids) > problem.basis.d_eff + 1:
            j_tests = j_test(point.log_weights, problem.centroids, problem.basis, boot.log_weight_var)
            flags["variance_ridge"] = any(test.ridge_added for test in j_tests)
        else:
            LOG.warning("J-test skipped: no overidentifying cells")
        if config.efficient_weights:
            inverse, _ = inverse_variance_weights(boot.log_weight_var)
            gamma = second_stage(point.log_weights, problem.centroids, problem.basis, inverse).gamma

    params = params_from_gamma(gamma, problem, names, template)
    report = responsibilities(params, features, matrix)
    return TwoStepFit(problem.rules, problem.baseline, gamma, None if boot is None else boot.gamma_se, j_tests,
                      report, None if boot is None else boot.weights_se, params, point.cells,
                      problem.basis.d_eff, flags)


def two_step_responsibilities(fit: TwoStepFit, features: FloatArray, matrix: RuleMatrix) -> ResponsibilityReport:
    """Average conditional-on-activity weights implied by the two-step gate on any menu sample."""
    return responsibilities(fit.params, features, matrix)


@dataclass(frozen=True)
class WeightAgreement:
    spearman: float
    pearson: float


def compare_weights(two_step: FloatArray, mse_fit: FloatArray) -> WeightAgreement:
    return WeightAgreement(float(spearmanr(two_step, mse_fit)[0]), float(pearsonr(two_step, mse_fit)[0]))
