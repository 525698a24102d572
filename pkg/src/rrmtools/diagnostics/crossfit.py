from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.common.time_measure import DurationMeasure, TimeUnit
from rrmtools.common.workers import map_jobs
from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import ValidationError
from rrmtools.evaluation import FoldFit, RuleGatingModel, Split, SplitPlan, fit_fold, make_splits
from rrmtools.rules import FAMILY_OF, RuleId

DEFAULT_TOPK = (3, 5, 7, 12)


def top_rules(rules: Sequence[RuleId], weights: FloatArray, k: int) -> tuple[RuleId, ...]:
    """The k rules with the largest weights, ties broken by library order, returned in library order."""
    order = sorted(range(len(rules)), key=lambda j: (-weights[j], rules[j].index))
    chosen = set(order[:k])
    return tuple(rule for j, rule in enumerate(rules) if j in chosen)


def top_families(rules: Sequence[RuleId], weights: FloatArray, k: int) -> tuple[RuleId, ...]:
    """All library rules from the k families with the largest summed weight."""
    families = list(dict.fromkeys(FAMILY_OF[rule] for rule in rules))
    totals = {family: sum(w for rule, w in zip(rules, weights) if FAMILY_OF[rule] == family) for family in families}
    ranked = sorted(families, key=lambda family: (-totals[family], families.index(family)))
    chosen = set(ranked[:k])
    return tuple(rule for rule in rules if FAMILY_OF[rule] in chosen)


@dataclass(frozen=True)
class Restriction:
    label: str
    k: int
    by_family: bool


@dataclass(frozen=True)
class CrossfitRow:
    label: str
    k: int
    mean_rules: float
    mean_test_mse: float
    sd_test_mse: float
    retention: float
    fold_mse: list[float] = field(default_factory=list)

    @staticmethod
    def headers() -> list[str]:
        return ["restriction", "k", "mean_rules", "mean_test_mse", "sd_test_mse", "retention_pct"]

    def as_row(self) -> list:
        return [self.label, self.k, self.mean_rules, self.mean_test_mse, self.sd_test_mse, self.retention]


@dataclass(frozen=True)
class CrossfitReport:
    full_mse: float
    rows: list[CrossfitRow]
    frequencies: dict[str, dict[str, float]]

    def frequency_headers(self) -> list[str]:
        return ["rule"] + [row.label for row in self.rows]

    def frequency_rows(self) -> list[list]:
        rules = next(iter(self.frequencies.values())).keys() if self.frequencies else []
        return [[rule] + [self.frequencies[row.label][rule] for row in self.rows] for rule in rules]


def retention(mse_k: float, mse_full: float) -> float:
    return 100.0 * (1.0 - (mse_k - mse_full) / mse_full)


def crossfit_topk(
        dataset: Dataset,
        model: RuleGatingModel,
        plan: SplitPlan,
        learning_rate: float,
        ks: Sequence[int] = DEFAULT_TOPK,
        family_ks: Optional[Sequence[int]] = None,
        threads: int = 1,
) -> CrossfitReport:
    """
    Cross-fitted library restriction. On each split the full gate is fit on the training set, rules
    (or families) are ranked by their training responsibilities, and a gate restricted to the top k
    is refit and scored on the test set. Selection never sees test data.
    """
    library = model.matrix.rules
    n_families = len(set(FAMILY_OF[rule] for rule in library))
    for k in ks:
        if not 1 <= k <= len(library):
            raise ValidationError(f"top-k must lie in [1, {len(library)}], got {k}")
    for k in family_ks or ():
        if not 1 <= k <= n_families:
            raise ValidationError(f"family top-k must lie in [1, {n_families}], got {k}")
    restrictions = [Restriction(f"top-{k}", k, False) for k in ks]
    restrictions += [Restriction(f"families-{k}", k, True) for k in family_ks or ()]

    targets = dataset.targets()
    splits = make_splits(len(dataset), plan)

    def job(split: Split) -> tuple[FoldFit, list[tuple[tuple[RuleId, ...], float]]]:
        full = fit_fold(model, targets, split, learning_rate)
        weights = full.fitted.responsibilities(split.train).weights
        restricted = []
        for restriction in restrictions:
            pick = top_families if restriction.by_family else top_rules
            chosen = pick(library, weights, restriction.k)
            if len(chosen) == len(library):
                restricted.append((chosen, full.test_mse))
            else:
                restricted.append((chosen, fit_fold(model.with_rules(chosen), targets, split, learning_rate).test_mse))
        return full, restricted

    with DurationMeasure(action=f"cross-fit over {len(splits)} splits", unit=TimeUnit.SECONDS):
        results = map_jobs(job, splits, threads)

    full_mse = np.array([full.test_mse for full, _ in results])
    rows, frequencies = [], {}
    for i, restriction in enumerate(restrictions):
        chosen = [restricted[i][0] for _, restricted in results]
        mse = np.array([restricted[i][1] for _, restricted in results])
        rows.append(CrossfitRow(
            label=restriction.label,
            k=restriction.k,
            mean_rules=float(np.mean([len(c) for c in chosen])),
            mean_test_mse=float(mse.mean()),
            sd_test_mse=float(mse.std(ddof=1)) if len(mse) > 1 else 0.0,
            retention=retention(float(mse.mean()), float(full_mse.mean())),
            fold_mse=mse.tolist(),
        ))
        frequencies[restriction.label] = {rule.value: sum(rule in c for c in chosen) / len(chosen) for rule in library}
        LOG.info(f"{restriction.label}: mean test MSE {rows[-1].mean_test_mse:.5f}, retention {rows[-1].retention:.1f}%")
    return CrossfitReport(float(full_mse.mean()), rows, frequencies)
