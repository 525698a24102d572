from dataclasses import dataclass

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray

RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class RankInfo:
    rank: int
    singular_values: FloatArray
    gap: float


def numerical_rank(matrix: FloatArray, rtol: float = RANK_RTOL) -> tuple[int, FloatArray]:
    """Count of singular values above rtol * sigma_1."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if matrix.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] <= 0:
        return 0, s
    return int(np.sum(s > rtol * s[0])), s


def cell_rank(h: FloatArray, n_rules: int, rtol: float = RANK_RTOL) -> RankInfo:
    """
    Numerical rank of a cell's restriction matrix, with the gap sigma_{F-1} / sigma_F used to
    judge how sharply the one-dimensional null space stands out (inf when sigma_F is zero or absent).
    """
    rank, s = numerical_rank(h, rtol)
    if len(s) >= n_rules and n_rules >= 2:
        gap = float(s[n_rules - 2] / s[n_rules - 1]) if s[n_rules - 1] > 0 else float('inf')
    elif len(s) == n_rules - 1 and n_rules >= 2:
        gap = float('inf')
    else:
        gap = float('nan')
    return RankInfo(rank, s, gap)


@dataclass(frozen=True, eq=False)
class FeatureBasis:
    """
    Non-degenerate directions of a feature sample: `directions` (d x d_eff) span the row space of
    the centered features, so `project(z)` drops exact linear redundancies such as a gap that
    equals the difference of two level features.
    """
    d_eff: int
    directions: FloatArray

    def project(self, features: FloatArray) -> FloatArray:
        return np.asarray(features, dtype=np.float64) @ self.directions

    def lift(self, slopes: FloatArray) -> FloatArray:
        """Reduced-coordinate slopes back to feature space (minimum-norm representative)."""
        return np.asarray(slopes, dtype=np.float64) @ self.directions.T


def effective_basis(features: FloatArray, rtol: float = RANK_RTOL) -> FeatureBasis:
    features = np.asarray(features, dtype=np.float64)
    augmented = np.column_stack([np.ones(len(features)), features])
    rank, _ = numerical_rank(augmented, rtol)
    d_eff = max(rank - 1, 0)
    centered = features - features.mean(axis=0)
    if d_eff == 0:
        return FeatureBasis(0, np.zeros((features.shape[1], 0)))
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return FeatureBasis(d_eff, vt[:d_eff].T)
