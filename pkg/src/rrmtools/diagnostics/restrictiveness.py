from dataclasses import dataclass
from typing import Any

import numpy as np
from globalog import LOG

from rrmtools.common.time_measure import DurationMeasure, TimeUnit
from rrmtools.common.workers import map_jobs
from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import DegenerateDenominator, ValidationError
from rrmtools.evaluation import ChoiceModel, Split, SplitPlan, make_splits, metrics


@dataclass(frozen=True)
class RestrictivenessReport:
    model: str
    ratio: float
    sd: float
    n_splits: int
    permutations: int
    learning_rate: float

    def as_dict(self) -> dict[str, Any]:
        return {"model": self.model, "ratio": self.ratio, "sd": self.sd, "n_splits": self.n_splits,
                "permutations": self.permutations, "learning_rate": self.learning_rate}


def restrictiveness(
        dataset: Dataset,
        model: ChoiceModel,
        plan: SplitPlan,
        learning_rate: float,
        permutations: int = 10,
        seed: int = 0,
        threads: int = 1,
) -> RestrictivenessReport:
    """
    How well a model fits targets with no structure. Training targets are permuted across the
    training menus of each split, the model is refit at the given learning rate (no new search), and
    its in-sample MSE is divided by that of the constant predictor on the same permuted targets.
    Values near 1 mean the model cannot fit noise; an interpolating model scores 0.
    """
    if permutations < 1:
        raise ValidationError(f"permutations must be >= 1, got {permutations}")
    targets = dataset.targets()
    splits = make_splits(len(dataset), plan)

    def job(item: tuple[Split, int]) -> float:
        split, p = item
        rng = np.random.default_rng((seed, split.index, p))
        y = targets[split.train][rng.permutation(len(split.train))]
        fitted = model.fit(split.train, y, learning_rate)
        model_mse = metrics(fitted.predict(split.train), y).mse
        constant_mse = metrics(np.full(len(y), np.mean(y)), y).mse
        if constant_mse <= 0:
            raise DegenerateDenominator(f"split {split.index}: training targets are constant")
        return model_mse / constant_mse

    items = [(split, p) for split in splits for p in range(permutations)]
    with DurationMeasure(action=f"restrictiveness of {model.name} ({len(items)} refits)", unit=TimeUnit.SECONDS):
        ratios = np.array(map_jobs(job, items, threads))
    report = RestrictivenessReport(model.name, float(np.mean(ratios)),
                                   float(np.std(ratios, ddof=1)) if len(ratios) > 1 else 0.0,
                                   len(splits), permutations, learning_rate)
    LOG.info(f"Restrictiveness of {model.name}: {report.ratio:.4f}")
    return report
