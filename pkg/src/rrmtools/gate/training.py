from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from globalog import LOG
from scipy.special import softmax

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import DimensionMismatch, LengthMismatch, NonFiniteLoss, ValidationError
from rrmtools.gate.params import DEFAULT_M_MIN, GateParams
from rrmtools.rules import RuleMatrix


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 1000
    clip_norm: float = 1.0
    m_min: float = DEFAULT_M_MIN
    seed: int = 0
    lr_grid: tuple[float, ...] = (0.001, 0.01, 0.1)
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    init_scale: float = 0.0
    log_every: int = 200

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError(f"learning rate must be positive, got {self.learning_rate}")
        if self.m_min <= 0:
            raise ValidationError(f"m_min must be positive, got {self.m_min}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: GateParams
    trace: FloatArray
    final_mse: float
    config: TrainConfig = field(repr=False, default_factory=TrainConfig)


@dataclass(frozen=True, eq=False)
class Batch:
    """Training arrays: features (T x d), activity and left indicators (T x F, 0/1) and targets (T,)."""
    features: FloatArray
    active: FloatArray
    left: FloatArray
    targets: FloatArray

    @staticmethod
    def of(matrix: RuleMatrix, features: FloatArray, targets: FloatArray) -> 'Batch':
        features = np.asarray(features, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if len(features) != matrix.n_menus or len(targets) != matrix.n_menus:
            raise LengthMismatch(f"{matrix.n_menus} menus, {len(features)} feature rows, {len(targets)} targets")
        if np.any((targets < 0) | (targets > 1)):
            raise ValidationError("targets must lie in [0, 1]")
        return Batch(features, matrix.active.astype(np.float64), matrix.kappa_left.astype(np.float64), targets)

    def take(self, indices: np.ndarray) -> 'Batch':
        return Batch(self.features[indices], self.active[indices], self.left[indices], self.targets[indices])


def loss_and_grad(alpha: FloatArray, beta: FloatArray, batch: Batch, m_min: float) -> tuple[float, FloatArray, FloatArray]:
    """
    Mean squared error of the guarded mixture and its exact gradient in (alpha, beta).
    Through the guard max(m, m_min) the derivative in m is 1 above m_min and 0 on the guard branch.
    """
    q = softmax(alpha + batch.features @ beta.T, axis=1)
    ell = np.sum(q * batch.left, axis=1)
    mass = np.sum(q * batch.active, axis=1)
    open_ = mass > m_min
    denom = np.where(open_, mass, m_min)
    g = ell / denom
    residual = g - batch.targets
    loss = float(np.mean(residual ** 2))

    dg_dq = batch.left / denom[:, None] - (open_ * ell / denom ** 2)[:, None] * batch.active
    dg_du = q * (dg_dq - np.sum(q * dg_dq, axis=1, keepdims=True))
    weights = (2.0 / len(g)) * residual
    grad_u = weights[:, None] * dg_du
    return loss, grad_u.sum(axis=0), grad_u.T @ batch.features


class AdamOptimizer:
    def __init__(self, config: TrainConfig, shapes: Sequence[tuple[int, ...]]):
        self.config = config
        self.m = [np.zeros(shape) for shape in shapes]
        self.v = [np.zeros(shape) for shape in shapes]
        self.t = 0

    def step(self, params: list[FloatArray], grads: list[FloatArray], learning_rate: float) -> list[FloatArray]:
        c = self.config
        norm = float(np.sqrt(sum(np.sum(grad ** 2) for grad in grads)))
        if norm > c.clip_norm:
            grads = [grad * (c.clip_norm / norm) for grad in grads]

        self.t += 1
        updated = []
        for i, (param, grad) in enumerate(zip(params, grads)):
            self.m[i] = c.beta1 * self.m[i] + (1 - c.beta1) * grad
            self.v[i] = c.beta2 * self.v[i] + (1 - c.beta2) * grad ** 2
            m_hat = self.m[i] / (1 - c.beta1 ** self.t)
            v_hat = self.v[i] / (1 - c.beta2 ** self.t)
            updated.append(param - learning_rate * m_hat / (np.sqrt(v_hat) + c.adam_eps))
        return updated


def train(
        matrix: RuleMatrix,
        features: FloatArray,
        targets: FloatArray,
        config: TrainConfig = TrainConfig(),
        feature_names: Optional[Sequence[str]] = None,
        rescale_factor: float = 1.0,
        encoding: str = "gate",
        learning_rate: Optional[float] = None,
) -> TrainResult:
    """
    Full-batch Adam with global-norm clipping on the training MSE.

    Args:
        matrix: rule indicators of the training menus; its library becomes the gate's library
        features: T x d gate inputs
        targets: observed left-choice rates
        config: optimizer settings; `learning_rate` overrides config.learning_rate

    Returns:
        TrainResult with the fitted parameters and the per-epoch training MSE trace
    """
    batch = Batch.of(matrix, features, targets)
    names = tuple(feature_names) if feature_names is not None else tuple(f"z_{i + 1}" for i in range(batch.features.shape[1]))
    if len(names) != batch.features.shape[1]:
        raise DimensionMismatch(f"{len(names)} feature names for {batch.features.shape[1]} columns")
    lr = config.learning_rate if learning_rate is None else learning_rate

    n_rules, dim = matrix.n_rules, batch.features.shape[1]
    rng = np.random.default_rng(config.seed)
    alpha = config.init_scale * rng.standard_normal(n_rules)
    beta = config.init_scale * rng.standard_normal((n_rules, dim))

    optimizer = AdamOptimizer(config, [alpha.shape, beta.shape])
    trace = np.empty(config.epochs)
    for epoch in range(config.epochs):
        loss, grad_alpha, grad_beta = loss_and_grad(alpha, beta, batch, config.m_min)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"training loss diverged at epoch {epoch} (learning rate {lr})")
        trace[epoch] = loss
        alpha, beta = optimizer.step([alpha, beta], [grad_alpha, grad_beta], lr)
        if config.log_every and epoch % config.log_every == 0:
            LOG.debug(f"epoch {epoch}: train mse {loss:.6f}")

    final_mse, _, _ = loss_and_grad(alpha, beta, batch, config.m_min)
    if not (np.isfinite(final_mse) and np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise NonFiniteLoss(f"training diverged (learning rate {lr})")

    params = GateParams(matrix.rules, alpha, beta, names, rescale_factor=rescale_factor, m_min=config.m_min,
                        epsilon=matrix.epsilon, encoding=encoding)
    return TrainResult(params, trace, final_mse, config)


@dataclass(frozen=True)
class GradientCheck:
    max_rel_error: float
    n_checked: int
    n_excluded_menus: int


def gradient_check(params: GateParams, batch: Batch, n_coords: int = 20, step: float = 1e-5, seed: int = 0,
                   abs_floor: float = 1e-4) -> GradientCheck:
    """
    Compares the analytic gradient with central finite differences on randomly drawn coordinates.
    Menus on the guard branch are dropped first; relative errors use max(|a|, |n|, abs_floor).
    """
    q = softmax(params.alpha + batch.features @ params.beta.T, axis=1)
    keep = np.flatnonzero(np.sum(q * batch.active, axis=1) > params.m_min)
    excluded = len(batch.targets) - len(keep)
    batch = batch.take(keep)

    _, grad_alpha, grad_beta = loss_and_grad(params.alpha, params.beta, batch, params.m_min)
    theta = np.concatenate([params.alpha, params.beta.ravel()])
    analytic = np.concatenate([grad_alpha, grad_beta.ravel()])
    n_alpha = len(params.alpha)

    def loss_at(vector: FloatArray) -> float:
        return loss_and_grad(vector[:n_alpha], vector[n_alpha:].reshape(params.beta.shape), batch, params.m_min)[0]

    rng = np.random.default_rng(seed)
    coords = rng.choice(len(theta), size=min(n_coords, len(theta)), replace=False)
    worst = 0.0
    for i in coords:
        bumped = theta.copy()
        bumped[i] += step
        up = loss_at(bumped)
        bumped[i] -= 2 * step
        down = loss_at(bumped)
        numeric = (up - down) / (2 * step)
        scale = max(abs(analytic[i]), abs(numeric), abs_floor)
        worst = max(worst, abs(analytic[i] - numeric) / scale)

    return GradientCheck(worst, len(coords), excluded)
