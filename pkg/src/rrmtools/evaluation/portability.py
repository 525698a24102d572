from dataclasses import asdict, dataclass
from typing import Any, Optional

import numpy as np
from globalog import LOG

from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import FactorMismatch
from rrmtools.evaluation.metrics import brier, log_loss, metrics
from rrmtools.features.matrix import feature_matrix
from rrmtools.gate import GateParams, predict_batch
from rrmtools.rules import build_rule_matrix

FACTOR_RTOL = 1e-9


@dataclass(frozen=True)
class PortabilityReport:
    dataset: str
    n_menus: int
    n_trials: int
    rescale_factor: float
    mse_menu: float
    brier_trial: float
    logloss_trial: float

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def portability(params: GateParams, dataset: Dataset, factor: Optional[float] = None,
                threads: int = 1) -> PortabilityReport:
    """
    Scores frozen gate parameters on another dataset with no re-tuning. Features are scaled with the
    rescale factor stored in the parameters; passing any other factor is an error.
    """
    if factor is not None and not np.isclose(factor, params.rescale_factor, rtol=FACTOR_RTOL, atol=0.0):
        raise FactorMismatch(f"rescale factor {factor} differs from the frozen factor {params.rescale_factor}")
    trials = dataset.require_trials()
    features = feature_matrix(dataset, params.encoding, factor=params.rescale_factor)
    matrix = build_rule_matrix(dataset.menus, epsilon=params.epsilon, rules=params.rules, threads=threads)
    g = predict_batch(params, features, matrix).g

    per_trial = g[trials.menu_index]
    report = PortabilityReport(
        dataset=dataset.name,
        n_menus=len(dataset),
        n_trials=len(trials),
        rescale_factor=params.rescale_factor,
        mse_menu=metrics(g, dataset.targets()).mse,
        brier_trial=brier(per_trial, trials.chose_left),
        logloss_trial=log_loss(per_trial, trials.chose_left),
    )
    LOG.info(f"Portability on {dataset.name}: MSE {report.mse_menu:.4f}, Brier {report.brier_trial:.4f}, "
             f"log-loss {report.logloss_trial:.4f}")
    return report
