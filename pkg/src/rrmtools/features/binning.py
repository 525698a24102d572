from dataclasses import dataclass
from typing import Sequence

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import IntArray
from rrmtools.errors import ValidationError


@dataclass(frozen=True, eq=False)
class BinAssignment:
    bins: IntArray
    n_bins: int
    degenerate: bool

    def members(self, b: int) -> IntArray:
        return np.flatnonzero(self.bins == b)


def decile_bins(values: Sequence[float], k: int = 10) -> BinAssignment:
    """
    Quantile bins with ties assigned to the lower bin, labelled 0..n_bins-1 in increasing value.
    With fewer than `k` distinct values each distinct value gets its own bin and the
    assignment is flagged degenerate.
    """
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValidationError("values must be a nonempty finite vector")

    distinct = np.unique(values)
    if distinct.size < k:
        LOG.warning(f"Only {distinct.size} distinct values for {k} bins, falling back to {distinct.size} bins")
        return BinAssignment(np.searchsorted(distinct, values).astype(np.int64), int(distinct.size), True)

    edges = np.quantile(values, np.arange(1, k) / k)
    raw = np.searchsorted(edges, values, side='left')
    used, relabelled = np.unique(raw, return_inverse=True)
    degenerate = used.size < k
    if degenerate:
        LOG.warning(f"Tied quantile edges left {used.size} of {k} bins populated")
    return BinAssignment(relabelled.astype(np.int64), int(used.size), degenerate)
