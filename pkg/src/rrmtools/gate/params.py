from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.common.json_io import read_json, write_json
from rrmtools.data_manage.schema import GATE_PARAMS_VERSION, GateParamsRecord
from rrmtools.errors import ConfigError, DimensionMismatch, ValidationError
from rrmtools.rules import RuleId, sort_rules

DEFAULT_M_MIN = 1e-6


@dataclass(frozen=True, eq=False)
class GateParams:
    """
    Softmax gate over a rule library: rule f gets logit alpha[f] + beta[f] @ z.
    `baseline` names the rule pinned to (0, 0) when the parameters are normalized.
    """
    rules: tuple[RuleId, ...]
    alpha: FloatArray
    beta: FloatArray
    feature_names: tuple[str, ...]
    rescale_factor: float = 1.0
    m_min: float = DEFAULT_M_MIN
    epsilon: float = 0.0
    encoding: str = "gate"
    baseline: Optional[RuleId] = None

    def __post_init__(self):
        n_rules = len(self.rules)
        if self.alpha.shape != (n_rules,):
            raise DimensionMismatch(f"alpha has shape {self.alpha.shape}, expected ({n_rules},)")
        if self.beta.shape != (n_rules, len(self.feature_names)):
            raise DimensionMismatch(f"beta has shape {self.beta.shape}, "
                                    f"expected ({n_rules}, {len(self.feature_names)})")
        if not (np.all(np.isfinite(self.alpha)) and np.all(np.isfinite(self.beta))):
            raise ValidationError("gate parameters must be finite")
        if self.m_min <= 0:
            raise ValidationError(f"m_min must be positive, got {self.m_min}")

    @staticmethod
    def zeros(rules: Sequence[RuleId], feature_names: Sequence[str], **kwargs) -> 'GateParams':
        rules = sort_rules(rules)
        return GateParams(rules, np.zeros(len(rules)), np.zeros((len(rules), len(feature_names))),
                          tuple(feature_names), **kwargs)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    @property
    def dim(self) -> int:
        return len(self.feature_names)

    def logits(self, z: FloatArray) -> FloatArray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1] != self.dim:
            raise DimensionMismatch(f"features have dimension {z.shape[-1]}, gate expects {self.dim}")
        return self.alpha + z @ self.beta.T

    def with_values(self, alpha: FloatArray, beta: FloatArray) -> 'GateParams':
        return replace(self, alpha=np.asarray(alpha, dtype=np.float64), beta=np.asarray(beta, dtype=np.float64))

    def normalized(self, baseline: RuleId = RuleId.A1) -> 'GateParams':
        """Same gate with the baseline rule's intercept and slopes pinned to zero."""
        if baseline not in self.rules:
            raise ValidationError(f"baseline {baseline.value} is not in the library")
        b = self.rules.index(baseline)
        return replace(self, alpha=self.alpha - self.alpha[b], beta=self.beta - self.beta[b], baseline=baseline)

    def to_record(self) -> GateParamsRecord:
        return GateParamsRecord(
            version=GATE_PARAMS_VERSION,
            rules=[rule.value for rule in self.rules],
            alpha=self.alpha.tolist(),
            beta=self.beta.tolist(),
            feature_names=list(self.feature_names),
            rescale_factor=float(self.rescale_factor),
            m_min=float(self.m_min),
            epsilon=float(self.epsilon),
            encoding=self.encoding,
            normalized_baseline=None if self.baseline is None else self.baseline.value,
        )

    @staticmethod
    def from_record(record: GateParamsRecord) -> 'GateParams':
        if record.version != GATE_PARAMS_VERSION:
            raise ConfigError(f"unsupported gate parameter version {record.version}")
        n_features = len(record.feature_names)
        beta = np.asarray(record.beta, dtype=np.float64).reshape(len(record.rules), n_features)
        return GateParams(
            rules=tuple(RuleId.parse(name) for name in record.rules),
            alpha=np.asarray(record.alpha, dtype=np.float64),
            beta=beta,
            feature_names=tuple(record.feature_names),
            rescale_factor=record.rescale_factor,
            m_min=record.m_min,
            epsilon=record.epsilon,
            encoding=record.encoding,
            baseline=None if record.normalized_baseline is None else RuleId.parse(record.normalized_baseline),
        )

    def save(self, path: str | Path):
        write_json(self.to_record().to_json(), path)

    @staticmethod
    def load(path: str | Path) -> 'GateParams':
        return GateParams.from_record(GateParamsRecord.from_json(read_json(path)))
