from dataclasses import dataclass

import numpy as np

from rrmtools.common.ext.typing_ext import IntArray
from rrmtools.common.workers import derive_seeds
from rrmtools.errors import TooFewMenus, ValidationError


@dataclass(frozen=True)
class SplitPlan:
    n_splits: int = 50
    train_fraction: float = 0.9
    inner_val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.n_splits < 1:
            raise ValidationError(f"n_splits must be >= 1, got {self.n_splits}")
        for name in ("train_fraction", "inner_val_fraction"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValidationError(f"{name} must lie in (0, 1), got {value}")


@dataclass(frozen=True, eq=False)
class Split:
    index: int
    train: IntArray
    test: IntArray
    sub_train: IntArray
    validation: IntArray


def _cut(n: int, fraction: float) -> int:
    return min(max(int(round(fraction * n)), 1), n - 1)


def make_splits(n: int, plan: SplitPlan) -> list[Split]:
    """Train/test partitions and the inner sub-train/validation partition of each training set."""
    if n < 4:
        raise TooFewMenus(f"cross-validation needs at least 4 menus, got {n}")
    splits = []
    for index, seed in enumerate(derive_seeds(plan.seed, plan.n_splits)):
        rng = np.random.default_rng(seed)
        order = rng.permutation(n)
        n_train = _cut(n, plan.train_fraction)
        train = order[:n_train]
        inner = rng.permutation(train)
        n_val = _cut(len(train), plan.inner_val_fraction)
        splits.append(Split(index, np.sort(train), np.sort(order[n_train:]), np.sort(inner[n_val:]),
                            np.sort(inner[:n_val])))
    return splits
