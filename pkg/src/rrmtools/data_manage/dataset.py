from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray, IntArray
from rrmtools.errors import LengthMismatch, MissingChoiceRate, MissingTrials, ValidationError
from rrmtools.features.gate_features import rescale_factor
from rrmtools.lottery import Menu


@dataclass(frozen=True, eq=False)
class TrialSet:
    """Individual binary choices: the menu row each trial belongs to and whether left was chosen."""
    menu_index: IntArray
    chose_left: IntArray

    def __post_init__(self):
        if self.menu_index.shape != self.chose_left.shape:
            raise LengthMismatch("menu_index and chose_left differ in length")

    def __len__(self) -> int:
        return len(self.menu_index)


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    menus: tuple[Menu, ...]
    rescale_factor: float
    provenance: dict[str, Any] = field(default_factory=dict)
    trials: Optional[TrialSet] = None
    feature_override: Optional[FloatArray] = None

    def __post_init__(self):
        ids = [menu.id for menu in self.menus]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"dataset {self.name}: menu ids are not unique")
        if self.feature_override is not None and len(self.feature_override) != len(self.menus):
            raise LengthMismatch("feature override rows do not match menus")

    @staticmethod
    def build(name: str, menus: Sequence[Menu], provenance: Optional[dict[str, Any]] = None,
              trials: Optional[TrialSet] = None) -> 'Dataset':
        return Dataset(name, tuple(menus), rescale_factor(menus), dict(provenance or {}), trials)

    def __len__(self) -> int:
        return len(self.menus)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(menu.id for menu in self.menus)

    @property
    def has_targets(self) -> bool:
        return all(menu.choice_rate is not None for menu in self.menus)

    def targets(self) -> FloatArray:
        if not self.has_targets:
            raise MissingChoiceRate(f"dataset {self.name} has menus without a choice rate")
        return np.array([menu.choice_rate for menu in self.menus], dtype=np.float64)

    def trial_counts(self) -> Optional[IntArray]:
        if any(menu.n_trials is None for menu in self.menus):
            return None
        return np.array([menu.n_trials for menu in self.menus], dtype=np.int64)

    def require_trials(self) -> TrialSet:
        if self.trials is None:
            raise MissingTrials(f"dataset {self.name} carries no trial-level records")
        return self.trials

    def subset(self, indices: Sequence[int]) -> 'Dataset':
        """Row subset that keeps the frozen rescale factor; trials are re-indexed to the new rows."""
        indices = np.asarray(indices, dtype=np.int64)
        trials = None
        if self.trials is not None:
            position = np.full(len(self.menus), -1, dtype=np.int64)
            position[indices] = np.arange(len(indices))
            keep = position[self.trials.menu_index] >= 0
            trials = TrialSet(position[self.trials.menu_index[keep]], self.trials.chose_left[keep])
        override = None if self.feature_override is None else self.feature_override[indices]
        return replace(self, menus=tuple(self.menus[i] for i in indices), trials=trials, feature_override=override)

    def with_rates(self, rates: Sequence[float]) -> 'Dataset':
        if len(rates) != len(self.menus):
            raise LengthMismatch(f"{len(rates)} rates for {len(self.menus)} menus")
        menus = tuple(replace(menu, choice_rate=float(rate)) for menu, rate in zip(self.menus, rates))
        return replace(self, menus=menus)
