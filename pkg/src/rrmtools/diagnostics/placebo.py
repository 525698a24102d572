from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from globalog import LOG

from rrmtools.data_manage.dataset import Dataset
from rrmtools.evaluation import RuleGatingModel, SplitPlan, fit_folds, make_splits
from rrmtools.rules import placebo_permute


@dataclass(frozen=True)
class PlaceboComparison:
    real_mse: float
    placebo_mse: float
    real_sd: float
    placebo_sd: float
    mean_difference: float
    strata: int
    seed: int

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def _sd(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if len(values) > 1 else 0.0


def placebo_comparison(dataset: Dataset, model: RuleGatingModel, plan: SplitPlan, learning_rate: float,
                       strata: int = 10, seed: int = 0, threads: int = 1) -> PlaceboComparison:
    """Test MSE of the real library against a placebo library with the same activity profile."""
    placebo = model.with_matrix(placebo_permute(model.matrix, dataset.menus, strata, seed))
    splits = make_splits(len(dataset), plan)
    real = np.array([fit.test_mse for fit in fit_folds(dataset, model, splits, learning_rate, threads)])
    fake = np.array([fit.test_mse for fit in fit_folds(dataset, placebo, splits, learning_rate, threads)])
    report = PlaceboComparison(float(real.mean()), float(fake.mean()), _sd(real), _sd(fake),
                               float((fake - real).mean()), strata, seed)
    LOG.info(f"Placebo library: test MSE {report.placebo_mse:.5f} vs {report.real_mse:.5f} for the real library")
    return report
