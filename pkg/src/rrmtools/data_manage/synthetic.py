from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from globalog import LOG
from scipy.special import softmax

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.data_manage.dataset import Dataset, TrialSet
from rrmtools.errors import DimensionMismatch, InfeasibleCell, ValidationError
from rrmtools.features.matrix import feature_matrix
from rrmtools.gate import GateParams, mixture
from rrmtools.identification.rank import cell_rank
from rrmtools.identification.restrictions import restriction_matrix
from rrmtools.lottery import Lottery, Menu, canonicalize
from rrmtools.rules import RuleId, build_rule_matrix, two_sided_mask


@dataclass(frozen=True)
class GeneratorConfig:
    """
    Synthetic menu design. In oracle mode every cell gets one random feature vector shared by all
    its menus, so cells are exact and their restriction systems can be checked for full switching
    rank. A nonzero `curvature` adds a quadratic term to the gate index (a misspecified gate).
    """
    n_cells: int = 13
    menus_per_cell: int = 20
    max_support: int = 4
    payoff_low: int = -20
    payoff_high: int = 50
    feature_scale: float = 1.0
    oracle: bool = True
    noiseless: bool = False
    curvature: float = 0.0
    with_trials: bool = False
    require_rank: bool = True
    max_retries: int = 50

    def __post_init__(self):
        if self.n_cells < 1 or self.menus_per_cell < 1:
            raise ValidationError("n_cells and menus_per_cell must be positive")
        if self.max_support < 1:
            raise ValidationError(f"max_support must be >= 1, got {self.max_support}")
        if self.payoff_high - self.payoff_low + 1 < self.max_support:
            raise ValidationError("payoff range too narrow for the requested support")


def random_lottery(rng: np.random.Generator, config: GeneratorConfig) -> Lottery:
    size = int(rng.integers(1, config.max_support + 1))
    payoffs = rng.choice(np.arange(config.payoff_low, config.payoff_high + 1), size=size, replace=False)
    return canonicalize(payoffs.astype(np.float64), rng.dirichlet(np.ones(size)))


def random_menus(rng: np.random.Generator, config: GeneratorConfig, prefix: str, n: int) -> list[Menu]:
    return [Menu(f"{prefix}-m{j:03d}", random_lottery(rng, config), random_lottery(rng, config)) for j in range(n)]


def draw_params(rules: Sequence[RuleId], feature_names: Sequence[str], alpha_scale: float = 1.0,
                beta_scale: float = 0.3, seed: int = 0, **kwargs) -> GateParams:
    """Random gate parameters normalized on the first rule of the library."""
    rng = np.random.default_rng(seed)
    params = GateParams.zeros(rules, feature_names, **kwargs)
    params = params.with_values(rng.normal(0.0, alpha_scale, params.n_rules),
                                rng.normal(0.0, beta_scale, (params.n_rules, params.dim)))
    return params.normalized(params.rules[0])


def choice_probabilities(params: GateParams, features: FloatArray, active: FloatArray, left: FloatArray,
                         curvature: float = 0.0) -> FloatArray:
    logits = params.logits(features)
    if curvature:
        logits = logits + curvature * (features ** 2) @ params.beta.T
    g, _, _, _ = mixture(softmax(logits, axis=-1), active, left, params.m_min)
    return g


def _switching_rank(params: GateParams, menus: Sequence[Menu], z: FloatArray, curvature: float) -> int:
    matrix = build_rule_matrix(menus, epsilon=params.epsilon, rules=params.rules)
    features = np.tile(z, (len(menus), 1))
    g = choice_probabilities(params, features, matrix.active.astype(np.float64),
                             matrix.kappa_left.astype(np.float64), curvature)
    h, _ = restriction_matrix(g, matrix)
    two_sided = two_sided_mask(matrix)
    if not two_sided.any():
        return 0
    return cell_rank(h[two_sided], params.n_rules).rank


def _oracle_menus(params: GateParams, config: GeneratorConfig, rng: np.random.Generator) -> tuple[list[Menu], FloatArray]:
    needed = params.n_rules - 1
    menus, rows = [], []
    for k in range(config.n_cells):
        z = rng.normal(0.0, config.feature_scale, params.dim)
        best = 0
        for attempt in range(config.max_retries):
            cell = random_menus(rng, config, f"c{k:03d}", config.menus_per_cell)
            if not config.require_rank:
                break
            rank = _switching_rank(params, cell, z, config.curvature)
            best = max(best, rank)
            if rank >= needed:
                break
            LOG.debug(f"cell {k}: switching rank {rank} < {needed}, redrawing (attempt {attempt + 1})")
        else:
            raise InfeasibleCell(f"cell {k}: cannot realize the requested switching richness", best, needed)
        menus += cell
        rows += [z] * len(cell)
    return menus, np.vstack(rows)


def generate_synthetic(params: GateParams, config: GeneratorConfig = GeneratorConfig(), n_trials: int = 100,
                       seed: int = 0, name: Optional[str] = None) -> Dataset:
    """
    Menus with choice rates drawn from the gate model itself. Rates are Binomial(n_trials, g) / n_trials
    around the model probability g, or g exactly in noiseless mode.
    """
    if n_trials < 1:
        raise ValidationError(f"n_trials must be >= 1, got {n_trials}")
    rng = np.random.default_rng(seed)
    if config.oracle:
        menus, features = _oracle_menus(params, config, rng)
    else:
        menus = random_menus(rng, config, "s", config.n_cells * config.menus_per_cell)
        features = feature_matrix(Dataset.build("draft", menus), params.encoding)
        if features.shape[1] != params.dim:
            raise DimensionMismatch(f"computed features have dimension {features.shape[1]}, gate expects {params.dim}")

    matrix = build_rule_matrix(menus, epsilon=params.epsilon, rules=params.rules)
    g = choice_probabilities(params, features, matrix.active.astype(np.float64),
                             matrix.kappa_left.astype(np.float64), config.curvature)
    counts = np.rint(g * n_trials).astype(np.int64) if config.noiseless else rng.binomial(n_trials, g)
    rates = g if config.noiseless else counts / n_trials
    menus = [replace(menu, choice_rate=float(rate), n_trials=n_trials) for menu, rate in zip(menus, rates)]

    trials = None
    if config.with_trials:
        index = np.repeat(np.arange(len(menus)), n_trials)
        chose = np.concatenate([np.r_[np.ones(c, dtype=np.int64), np.zeros(n_trials - c, dtype=np.int64)]
                                for c in counts])
        trials = TrialSet(index, chose)

    provenance = {"source": "synthetic", "seed": seed, "n_trials": n_trials, "n_cells": config.n_cells,
                  "menus_per_cell": config.menus_per_cell, "oracle": config.oracle, "noiseless": config.noiseless,
                  "curvature": config.curvature}
    dataset = Dataset.build(name or f"synthetic-{seed}", menus, provenance, trials)
    if config.oracle:
        dataset = replace(dataset, feature_override=features)
    LOG.info(f"Generated {len(dataset)} synthetic menus over {config.n_cells} cells (n_trials={n_trials})")
    return dataset
