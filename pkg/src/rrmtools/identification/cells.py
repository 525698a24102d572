from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from globalog import LOG
from sklearn.cluster import KMeans
from sklearn.preprocessing import StandardScaler

from rrmtools.common.ext.typing_ext import BoolArray, FloatArray, IntArray
from rrmtools.errors import TooFewMenus, ValidationError
from rrmtools.identification.rank import RANK_RTOL, RankInfo, cell_rank

KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CellAssignment:
    """Cell label per menu, with cell centroids in the original feature units."""
    labels: IntArray
    centroids: FloatArray
    exact: BoolArray
    sizes: IntArray
    settings: dict[str, Any] = field(default_factory=dict)

    @property
    def n_cells(self) -> int:
        return len(self.centroids)

    def members(self, cell: int) -> IntArray:
        return np.flatnonzero(self.labels == cell)


def build_cells(features: FloatArray, k: int = 50, seed: int = 0, min_size: int = 11) -> CellAssignment:
    """
    Groups menus by exactly equal feature vectors first; menus left in groups smaller than
    `min_size` are clustered by k-means (k-means++ seeding) on standardized features into the
    cells that remain of the budget `k`. When the exact groups alone use up `k`, the leftover
    menus share one extra cell, so `n_cells` exceeds `k` only in that case.
    """
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    features = np.asarray(features, dtype=np.float64)
    if len(features) < 2:
        raise TooFewMenus(f"need at least 2 menus to build cells, got {len(features)}")

    _, inverse, counts = np.unique(features, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    exact_groups = np.flatnonzero(counts >= min_size)

    labels = np.full(len(features), -1, dtype=np.int64)
    for cell, group in enumerate(exact_groups):
        labels[inverse == group] = cell
    n_exact = len(exact_groups)

    settings: dict[str, Any] = {"k": k, "seed": seed, "min_size": min_size, "init": "k-means++",
                                "max_iter": KMEANS_MAX_ITER, "tol": KMEANS_TOL, "n_exact_cells": n_exact,
                                "kmeans_used": False}
    remaining = np.flatnonzero(labels < 0)
    if len(remaining) > 0:
        n_distinct = len(np.unique(features[remaining], axis=0))
        n_clusters = min(max(k - n_exact, 1), n_distinct)
        if n_clusters <= 1:
            labels[remaining] = n_exact
        else:
            scaled = StandardScaler().fit(features).transform(features[remaining])
            kmeans = KMeans(n_clusters=n_clusters, init='k-means++', n_init=1, max_iter=KMEANS_MAX_ITER,
                            tol=KMEANS_TOL, random_state=seed).fit(scaled)
            _, clustered = np.unique(kmeans.labels_, return_inverse=True)
            labels[remaining] = n_exact + clustered.reshape(-1)
            settings.update(kmeans_used=True, n_clusters=n_clusters, n_iter=int(kmeans.n_iter_),
                            converged=bool(kmeans.n_iter_ < KMEANS_MAX_ITER))
        LOG.debug(f"{len(remaining)} menus outside exact cells assigned to {n_clusters} clusters")

    n_cells = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=n_cells)
    centroids = np.vstack([features[labels == c].mean(axis=0) for c in range(n_cells)])
    exact = np.arange(n_cells) < n_exact
    LOG.info(f"Built {n_cells} cells ({n_exact} exact), {int(np.sum(sizes >= min_size))} with >= {min_size} menus")
    return CellAssignment(labels, centroids, exact, sizes, settings)


@dataclass(frozen=True, eq=False)
class CellSystem:
    """One cell's stacked restriction rows (two-sided members only) and their rank summary."""
    cell_id: int
    member_indices: IntArray
    menu_ids: tuple[str, ...]
    centroid: FloatArray
    h: FloatArray
    rank_info: RankInfo
    exact: bool
    qualifies: bool

    @property
    def rank(self) -> int:
        return self.rank_info.rank

    @property
    def singular_values(self) -> FloatArray:
        return self.rank_info.singular_values

    @property
    def n_rows(self) -> int:
        return len(self.h)


def cell_systems(
        h: FloatArray,
        two_sided: BoolArray,
        assignment: CellAssignment,
        menu_ids: tuple[str, ...],
        min_rows: Optional[int] = None,
        rtol: float = RANK_RTOL,
) -> list[CellSystem]:
    """Cells with at least one two-sided menu; `qualifies` marks those with >= min_rows rows (default F - 1)."""
    n_rules = h.shape[1]
    min_rows = n_rules - 1 if min_rows is None else min_rows
    systems = []
    for cell in range(assignment.n_cells):
        rows = np.flatnonzero((assignment.labels == cell) & two_sided)
        if len(rows) == 0:
            continue
        h_cell = h[rows]
        systems.append(CellSystem(
            cell_id=cell,
            member_indices=rows,
            menu_ids=tuple(menu_ids[i] for i in rows),
            centroid=assignment.centroids[cell],
            h=h_cell,
            rank_info=cell_rank(h_cell, n_rules, rtol),
            exact=bool(assignment.exact[cell]),
            qualifies=len(rows) >= min_rows,
        ))
    return systems
