import datetime
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.common.time_measure import DurationMeasure, TimeUnit
from rrmtools.common.workers import map_jobs
from rrmtools.data_manage.dataset import Dataset
from rrmtools.data_manage.schema import RUN_RECORD_VERSION, FoldMetrics, RunRecord
from rrmtools.errors import ValidationError
from rrmtools.evaluation.metrics import metrics
from rrmtools.evaluation.models import ChoiceModel, FittedModel
from rrmtools.evaluation.splits import Split, SplitPlan, make_splits

DEFAULT_LR_GRID = (0.001, 0.01, 0.1)
DEFAULT_CURVE_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True, eq=False)
class FoldFit:
    split: Split
    learning_rate: float
    fitted: FittedModel
    test_mse: float
    test_mse_w: Optional[float] = None


def _now() -> str:
    return datetime.datetime.now().isoformat(timespec="seconds")


def _sd(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def fit_fold(model: ChoiceModel, targets: FloatArray, split: Split, learning_rate: float,
             trials: Optional[FloatArray] = None) -> FoldFit:
    """Train on the split's full training set and score its test set."""
    fitted = model.fit(split.train, targets[split.train], learning_rate)
    scored = metrics(fitted.predict(split.test), targets[split.test],
                     None if trials is None else trials[split.test])
    return FoldFit(split, learning_rate, fitted, scored.mse, scored.mse_w)


def fit_folds(dataset: Dataset, model: ChoiceModel, splits: Sequence[Split], learning_rate: float,
              threads: int = 1) -> list[FoldFit]:
    targets = dataset.targets()
    trials = dataset.trial_counts()
    return map_jobs(lambda split: fit_fold(model, targets, split, learning_rate, trials), splits, threads)


def select_learning_rate(validation: dict[float, list[float]]) -> float:
    """Learning rate with the lowest mean validation MSE; ties go to the earliest grid entry."""
    means = {lr: float(np.mean(values)) for lr, values in validation.items()}
    return min(means, key=lambda lr: (means[lr], list(means).index(lr)))


def run_cv(
        dataset: Dataset,
        model: ChoiceModel,
        plan: SplitPlan = SplitPlan(),
        lr_grid: Sequence[float] = DEFAULT_LR_GRID,
        threads: int = 1,
        config_snapshot: Optional[dict[str, Any]] = None,
) -> RunRecord:
    """
    Two-pass cross-validation.

    Pass A trains on each split's sub-training set at every candidate learning rate and scores the
    inner validation set. The rate with the lowest mean validation MSE is fixed before Pass B runs.
    Pass B retrains on the full training set at every candidate rate and scores the test set; the
    reported performance is the Pass-B test MSE at the selected rate.
    """
    if not lr_grid:
        raise ValidationError("lr_grid must not be empty")
    started_at = _now()
    targets = dataset.targets()
    trials = dataset.trial_counts()
    splits = make_splits(len(dataset), plan)
    jobs = [(split, lr) for split in splits for lr in lr_grid]

    def pass_a(job: tuple[Split, float]) -> float:
        split, lr = job
        fitted = model.fit(split.sub_train, targets[split.sub_train], lr)
        return metrics(fitted.predict(split.validation), targets[split.validation]).mse

    with DurationMeasure(action=f"cv pass A ({model.name}, {len(jobs)} jobs)", unit=TimeUnit.SECONDS):
        validation_mse = map_jobs(pass_a, jobs, threads)
    by_lr: dict[float, list[float]] = {lr: [] for lr in lr_grid}
    for (_, lr), value in zip(jobs, validation_mse):
        by_lr[lr].append(value)
    selected = select_learning_rate(by_lr)
    LOG.info(f"Selected learning rate {selected} for {model.name} on {dataset.name}")

    with DurationMeasure(action=f"cv pass B ({model.name}, {len(jobs)} jobs)", unit=TimeUnit.SECONDS):
        test_fits = map_jobs(lambda job: fit_fold(model, targets, job[0], job[1], trials), jobs, threads)

    folds = [FoldMetrics(split.index, lr, "validation", mse) for (split, lr), mse in zip(jobs, validation_mse)]
    folds += [FoldMetrics(fit.split.index, fit.learning_rate, "test", fit.test_mse, fit.test_mse_w) for fit in test_fits]
    chosen = [fit for fit in test_fits if fit.learning_rate == selected]
    test_mse = [fit.test_mse for fit in chosen]
    mean_mse_w = None if trials is None else float(np.mean([fit.test_mse_w for fit in chosen]))
    record = RunRecord(
        id=f"{dataset.name}-{model.name}-{plan.seed}",
        version=RUN_RECORD_VERSION,
        dataset=dataset.name,
        model=model.name,
        config=config_snapshot or {},
        selected_learning_rate=selected,
        mean_test_mse=float(np.mean(test_mse)),
        sd_test_mse=_sd(test_mse),
        mean_test_mse_w=mean_mse_w,
        folds=folds,
        started_at=started_at,
        finished_at=_now(),
    )
    LOG.info(f"{model.name} on {dataset.name}: mean test MSE {record.mean_test_mse:.5f} "
             f"(sd {record.sd_test_mse:.5f}) over {len(chosen)} splits")
    return record


@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    n_train: int
    mean_test_mse: float
    sd_test_mse: float

    @staticmethod
    def headers() -> list[str]:
        return ["fraction", "n_train", "mean_test_mse", "sd_test_mse"]

    def as_row(self) -> list:
        return [self.fraction, self.n_train, self.mean_test_mse, self.sd_test_mse]


def learning_curve(
        dataset: Dataset,
        model: ChoiceModel,
        plan: SplitPlan,
        learning_rate: float,
        fractions: Sequence[float] = DEFAULT_CURVE_FRACTIONS,
        threads: int = 1,
) -> list[CurvePoint]:
    """Test MSE when training on a random fraction of each split's training set; test sets stay fixed."""
    for fraction in fractions:
        if not (0.0 < fraction <= 1.0):
            raise ValidationError(f"learning-curve fraction must lie in (0, 1], got {fraction}")
    targets = dataset.targets()
    splits = make_splits(len(dataset), plan)

    def job(item: tuple[Split, float]) -> tuple[int, float]:
        split, fraction = item
        rng = np.random.default_rng((plan.seed, split.index))
        n_train = max(int(round(fraction * len(split.train))), 1)
        rows = np.sort(rng.permutation(split.train)[:n_train])
        fitted = model.fit(rows, targets[rows], learning_rate)
        return n_train, metrics(fitted.predict(split.test), targets[split.test]).mse

    items = [(split, fraction) for fraction in fractions for split in splits]
    results = map_jobs(job, items, threads)
    points = []
    for i, fraction in enumerate(fractions):
        chunk = results[i * len(splits):(i + 1) * len(splits)]
        values = [mse for _, mse in chunk]
        points.append(CurvePoint(fraction, chunk[0][0], float(np.mean(values)), _sd(values)))
        LOG.info(f"learning curve {fraction:.2f}: mean test MSE {points[-1].mean_test_mse:.5f}")
    return points


@dataclass(frozen=True)
class PairedComparison:
    model_a: str
    model_b: str
    n_splits: int
    mean_difference: float
    se: float
    ratio: float

    def as_dict(self) -> dict[str, Any]:
        return {"model_a": self.model_a, "model_b": self.model_b, "n_splits": self.n_splits,
                "mean_difference": self.mean_difference, "se": self.se, "ratio": self.ratio}


def paired_comparison(record_a: RunRecord, record_b: RunRecord) -> PairedComparison:
    """Per-split test MSE differences (a minus b) on the splits both runs share. Descriptive only."""
    a = record_a.test_mse_by_split()
    b = record_b.test_mse_by_split()
    shared = sorted(set(a) & set(b))
    if not shared:
        raise ValidationError(f"runs {record_a.id} and {record_b.id} share no splits")
    diffs = np.array([a[s] - b[s] for s in shared])
    se = float(np.std(diffs, ddof=1) / np.sqrt(len(diffs))) if len(diffs) > 1 else 0.0
    mean = float(np.mean(diffs))
    return PairedComparison(record_a.model, record_b.model, len(shared), mean, se,
                            mean / se if se > 0 else float("nan"))
