from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import chi2

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import RankDeficientDesign, SingularVariance, ValidationError
from rrmtools.identification import FeatureBasis, numerical_rank

VARIANCE_RIDGE = 1e-10


@dataclass(frozen=True, eq=False)
class SecondStage:
    """Per-rule coefficients gamma (rows: non-baseline rules; columns: intercept then reduced slopes)."""
    gamma: FloatArray
    residuals: FloatArray
    design: FloatArray


@dataclass(frozen=True)
class JTest:
    statistic: float
    dof: int
    p_value: float
    ridge_added: bool


def design_matrix(centroids: FloatArray, basis: FeatureBasis) -> FloatArray:
    centroids = np.atleast_2d(np.asarray(centroids, dtype=np.float64))
    return np.column_stack([np.ones(len(centroids)), basis.project(centroids)])


def second_stage(log_weights: FloatArray, centroids: FloatArray, basis: FeatureBasis,
                 weights: Optional[FloatArray] = None) -> SecondStage:
    """
    Regresses each rule's cell log-weights on [1, centroid] (centroids projected on the effective
    feature directions). `weights`, when given, holds one positive weight per (cell, rule) entry of
    `log_weights` and switches that rule to weighted least squares.
    """
    y = np.atleast_2d(np.asarray(log_weights, dtype=np.float64))
    x = design_matrix(centroids, basis)
    n_cells, n_coef = x.shape
    if n_cells < n_coef:
        raise RankDeficientDesign(f"{n_cells} cells cannot identify {n_coef} coefficients")
    rank, _ = numerical_rank(x)
    if rank < n_coef:
        raise RankDeficientDesign(f"cell design has rank {rank}, needs {n_coef}")

    gamma = np.empty((y.shape[1], n_coef))
    for f in range(y.shape[1]):
        if weights is None:
            gamma[f] = np.linalg.lstsq(x, y[:, f], rcond=None)[0]
        else:
            root = np.sqrt(weights[:, f])
            gamma[f] = np.linalg.lstsq(x * root[:, None], y[:, f] * root, rcond=None)[0]
    residuals = y - x @ gamma.T
    return SecondStage(gamma, residuals, x)


def inverse_variance_weights(variances: FloatArray) -> tuple[FloatArray, bool]:
    variances = np.asarray(variances, dtype=np.float64)
    if not np.all(np.isfinite(variances)):
        raise SingularVariance("non-finite bootstrap variance")
    ridge_added = bool(np.any(variances <= 0))
    variances = np.where(variances <= 0, VARIANCE_RIDGE, variances)
    return 1.0 / variances, ridge_added


def j_test(log_weights: FloatArray, centroids: FloatArray, basis: FeatureBasis,
           variances: FloatArray) -> list[JTest]:
    """
    Minimum-distance overidentification test of the affine gate, one per non-baseline rule.
    `variances` are the sampling variances of each cell log-weight (cells independent), so the
    statistic is the efficient-weighted sum of squared residuals, chi-square with K - d_eff - 1 dof.
    """
    y = np.atleast_2d(np.asarray(log_weights, dtype=np.float64))
    dof = y.shape[0] - (basis.d_eff + 1)
    if dof < 1:
        raise ValidationError(f"J-test needs more cells than coefficients ({y.shape[0]} cells, d_eff={basis.d_eff})")

    inverse, ridge_added = inverse_variance_weights(variances)
    efficient = second_stage(y, centroids, basis, inverse)
    statistics = np.sum(inverse * efficient.residuals ** 2, axis=0)
    return [JTest(float(stat), dof, float(chi2.sf(stat, dof)), ridge_added) for stat in statistics]
