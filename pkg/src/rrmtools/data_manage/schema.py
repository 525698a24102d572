from dataclasses import dataclass, field
from typing import Any, Optional

from jserpy import deserialize_json, serialize_json_as_dict
from jserpy.json_typing import JSON
from typing_extensions import Self

GATE_PARAMS_VERSION = 1
RUN_RECORD_VERSION = 1


@dataclass(frozen=True)
class DataRecord:
    def to_json(self) -> dict[str, JSON]:
        return serialize_json_as_dict(self)

    @classmethod
    def from_json(cls, json_dict: dict[str, Any]) -> Self:
        return deserialize_json(json_dict, cls)


@dataclass(frozen=True)
class GateParamsRecord(DataRecord):
    """Versioned on-disk form of fitted gate parameters."""
    version: int
    rules: list[str]
    alpha: list[float]
    beta: list[list[float]]
    feature_names: list[str]
    rescale_factor: float
    m_min: float
    epsilon: float = 0.0
    encoding: str = "gate"
    normalized_baseline: Optional[str] = None


@dataclass(frozen=True)
class FoldMetrics(DataRecord):
    split: int
    learning_rate: float
    phase: str
    mse: float
    mse_w: Optional[float] = None


@dataclass(frozen=True)
class RunRecord(DataRecord):
    """One cross-validated run: enough to reproduce and to compare with other runs fold by fold."""
    id: str
    version: int
    dataset: str
    model: str
    config: dict[str, Any]
    selected_learning_rate: float
    mean_test_mse: float
    sd_test_mse: float
    mean_test_mse_w: Optional[float]
    folds: list[FoldMetrics]
    params_path: Optional[str] = None
    started_at: str = ""
    finished_at: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def test_mse_by_split(self) -> dict[int, float]:
        return {fold.split: fold.mse for fold in self.folds
                if fold.phase == "test" and fold.learning_rate == self.selected_learning_rate}
