from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import softmax

from rrmtools.common.ext.typing_ext import BoolArray, FloatArray
from rrmtools.errors import DimensionMismatch
from rrmtools.gate.params import GateParams
from rrmtools.rules import RuleMatrix, RuleOutcome


@dataclass(frozen=True)
class Prediction:
    g: float
    q: FloatArray
    q_tilde: FloatArray
    guard_hit: bool


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    """Row-aligned predictions: choice probability, latent gate, conditional weights, guard flags."""
    g: FloatArray
    q: FloatArray
    q_tilde: FloatArray
    guard_hit: BoolArray
    active_mass: FloatArray

    def __len__(self) -> int:
        return len(self.g)

    def row(self, t: int) -> Prediction:
        return Prediction(float(self.g[t]), self.q[t], self.q_tilde[t], bool(self.guard_hit[t]))


def gate_weights(params: GateParams, z: FloatArray) -> FloatArray:
    """Softmax gate weights for one feature vector (or a T x d matrix, row-wise)."""
    return softmax(params.logits(z), axis=-1)


def _check_alignment(params: GateParams, matrix: RuleMatrix, features: FloatArray):
    if matrix.rules != params.rules:
        raise DimensionMismatch(f"rule matrix library {[r.value for r in matrix.rules]} differs from "
                                f"gate library {[r.value for r in params.rules]}")
    if len(features) != matrix.n_menus:
        raise DimensionMismatch(f"{len(features)} feature rows for {matrix.n_menus} menus")


def mixture(q: FloatArray, active: FloatArray, left: FloatArray, m_min: float) -> tuple[FloatArray, ...]:
    """
    Guarded mixture over decisive rules. Returns (g, q_tilde, guard_hit, active_mass);
    `active` and `left` are 0/1 arrays with `left` already restricted to active rules.
    """
    ell = np.sum(q * left, axis=-1)
    mass = np.sum(q * active, axis=-1)
    guard = mass <= m_min
    g = np.clip(ell / np.maximum(mass, m_min), 0.0, 1.0)
    safe_mass = np.where(guard, 1.0, mass)
    q_tilde = np.where(guard[..., None], 0.0, q * active / safe_mass[..., None])
    return g, q_tilde, guard, mass


def predict_batch(params: GateParams, features: FloatArray, matrix: RuleMatrix) -> PredictionBatch:
    _check_alignment(params, matrix, features)
    q = gate_weights(params, features)
    g, q_tilde, guard, mass = mixture(q, matrix.active.astype(np.float64), matrix.kappa_left.astype(np.float64),
                                      params.m_min)
    return PredictionBatch(g, q, q_tilde, guard, mass)


def predict(params: GateParams, menu_features: FloatArray, rule_row: Sequence[RuleOutcome],
            m_min: Optional[float] = None) -> Prediction:
    """
    Choice probability for one menu.

    Args:
        params: gate parameters
        menu_features: the menu's gate inputs
        rule_row: one RuleOutcome per rule, in the gate's rule order
        m_min: guard on the active gate mass; defaults to the value stored in `params`
    """
    if len(rule_row) != params.n_rules:
        raise DimensionMismatch(f"{len(rule_row)} rule outcomes for {params.n_rules} rules")
    q = gate_weights(params, menu_features)
    active = np.array([o.active for o in rule_row], dtype=np.float64)
    left = np.array([o.active and o.left for o in rule_row], dtype=np.float64)
    g, q_tilde, guard, _ = mixture(q, active, left, params.m_min if m_min is None else m_min)
    return Prediction(float(g), q, q_tilde, bool(guard))
