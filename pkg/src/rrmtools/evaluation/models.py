from abc import ABC, abstractmethod
from typing import Optional, Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray, IntArray
from rrmtools.gate import GateParams, ResponsibilityReport, TrainConfig, predict_batch, responsibilities, train
from rrmtools.rules import RuleId, RuleMatrix


class FittedModel(ABC):
    @abstractmethod
    def predict(self, rows: IntArray) -> FloatArray:
        """Predicted left-choice probability for the given dataset rows."""
        raise NotImplementedError()


class ChoiceModel(ABC):
    """A model bound to one dataset's design; fitting selects rows and supplies their targets."""

    name: str = "model"

    @abstractmethod
    def fit(self, rows: IntArray, targets: FloatArray, learning_rate: Optional[float] = None) -> FittedModel:
        raise NotImplementedError()


class FittedConstant(FittedModel):
    def __init__(self, value: float):
        self.value = value

    def predict(self, rows: IntArray) -> FloatArray:
        return np.full(len(rows), self.value)


class ConstantModel(ChoiceModel):
    name = "constant"

    def fit(self, rows: IntArray, targets: FloatArray, learning_rate: Optional[float] = None) -> FittedModel:
        return FittedConstant(float(np.mean(targets)))


class FittedLookup(FittedModel):
    def __init__(self, table: dict[int, float], default: float):
        self.table = table
        self.default = default

    def predict(self, rows: IntArray) -> FloatArray:
        return np.array([self.table.get(int(row), self.default) for row in rows])


class LookupTableModel(ChoiceModel):
    """One free parameter per menu: memorizes training targets, predicts their mean elsewhere."""
    name = "lookup"

    def fit(self, rows: IntArray, targets: FloatArray, learning_rate: Optional[float] = None) -> FittedModel:
        return FittedLookup({int(row): float(t) for row, t in zip(rows, targets)}, float(np.mean(targets)))


class FittedGate(FittedModel):
    def __init__(self, params: GateParams, matrix: RuleMatrix, features: FloatArray, train_mse: float):
        self.params = params
        self.matrix = matrix
        self.features = features
        self.train_mse = train_mse

    def predict(self, rows: IntArray) -> FloatArray:
        return predict_batch(self.params, self.features[rows], self.matrix.take(rows)).g

    def responsibilities(self, rows: IntArray) -> ResponsibilityReport:
        return responsibilities(self.params, self.features[rows], self.matrix.take(rows))


class RuleGatingModel(ChoiceModel):
    name = "rule-gating"

    def __init__(self, matrix: RuleMatrix, features: FloatArray, config: TrainConfig = TrainConfig(),
                 feature_names: Optional[Sequence[str]] = None, rescale_factor: float = 1.0, encoding: str = "gate"):
        self.matrix = matrix
        self.features = np.asarray(features, dtype=np.float64)
        self.config = config
        self.feature_names = feature_names
        self.rescale_factor = rescale_factor
        self.encoding = encoding

    def with_rules(self, rules: Sequence[RuleId]) -> 'RuleGatingModel':
        """Same design restricted to a smaller rule library."""
        return RuleGatingModel(self.matrix.select(rules), self.features, self.config, self.feature_names,
                               self.rescale_factor, self.encoding)

    def with_matrix(self, matrix: RuleMatrix) -> 'RuleGatingModel':
        return RuleGatingModel(matrix, self.features, self.config, self.feature_names, self.rescale_factor,
                               self.encoding)

    def fit(self, rows: IntArray, targets: FloatArray, learning_rate: Optional[float] = None) -> FittedGate:
        result = train(self.matrix.take(rows), self.features[rows], targets, self.config, self.feature_names,
                       self.rescale_factor, self.encoding, learning_rate)
        return FittedGate(result.params, self.matrix, self.features, result.final_mse)
