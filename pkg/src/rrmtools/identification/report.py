from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.data_manage.dataset import Dataset
from rrmtools.identification.cells import CellSystem, build_cells, cell_systems
from rrmtools.identification.rank import RANK_RTOL, effective_basis, numerical_rank
from rrmtools.identification.restrictions import DEFAULT_TRIM, restriction_matrix
from rrmtools.rules import RuleCoverage, RuleMatrix, rule_coverage, two_sided_mask


@dataclass(frozen=True)
class CellSummary:
    cell_id: int
    n_rows: int
    exact: bool
    qualifies: bool
    rank: int
    gap: float
    g1_pass: bool


@dataclass(frozen=True)
class IdentReport:
    n_menus: int
    n_rules: int
    two_sided_fraction: float
    coverage: list[RuleCoverage]
    n_cells: int
    n_qualifying: int
    g1_pass_count: int
    g1_needed: int
    g1_full_rank_count: int
    g2_rank: int
    d_eff: int
    verdict: bool
    cells: list[CellSummary] = field(default_factory=list)
    clustering: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return asdict(self)

    def to_text(self) -> str:
        lines = ["Rule coverage and side variation",
                 f"{'rule':<8}{'n_active':>10}{'Pr(act)':>10}{'Pr(L|act)':>11}{'Pr(R|act)':>11}{'switch':>8}"]
        for row in self.coverage:
            lines.append(f"{row.rule:<8}{row.n_active:>10d}{row.pr_active:>10.3f}{row.pr_left_given_active:>11.3f}"
                         f"{row.pr_right_given_active:>11.3f}{'yes' if row.switches_sides else 'no':>8}")
        lines += [
            "",
            "Identification diagnostics",
            f"(D1) two-sided menus          {self.two_sided_fraction * 100:.1f}% of {self.n_menus}",
            f"(G1) cells with rank >= {self.n_rules - 1:<5d} {self.g1_pass_count} / {self.g1_needed} needed "
            f"({self.n_qualifying} qualifying of {self.n_cells})",
            f"     of which rank = {self.n_rules:<5d} {self.g1_full_rank_count}",
            f"(G2) rank([1, centroids])     {self.g2_rank} / {self.d_eff + 1} needed",
            f"d_eff                         {self.d_eff}",
            f"verdict                       {'identified' if self.verdict else 'not identified'}",
        ]
        return "\n".join(lines)


def g2_rank(systems: list[CellSystem], rtol: float = RANK_RTOL) -> int:
    if not systems:
        return 0
    centroids = np.vstack([cell.centroid for cell in systems])
    rank, _ = numerical_rank(np.column_stack([np.ones(len(centroids)), centroids]), rtol)
    return rank


def ident_report(
        dataset: Dataset,
        matrix: RuleMatrix,
        features: FloatArray,
        k: int = 50,
        trim: float = DEFAULT_TRIM,
        seed: int = 0,
        min_cell_size: Optional[int] = None,
) -> IdentReport:
    """
    Rank diagnostics for rule-switching identification: two-sided share, per-rule coverage,
    cellwise rank sufficiency and affine richness of the passing cells' centroids.
    """
    rates = dataset.targets()
    h, _ = restriction_matrix(rates, matrix, trim)
    two_sided = two_sided_mask(matrix)
    min_size = matrix.n_rules - 1 if min_cell_size is None else min_cell_size

    assignment = build_cells(features, k, seed, min_size)
    systems = cell_systems(h, two_sided, assignment, matrix.menu_ids, min_size)
    needed_rank = matrix.n_rules - 1
    passing = [cell for cell in systems if cell.qualifies and cell.rank >= needed_rank]

    d_eff = effective_basis(features).d_eff
    rank_g2 = g2_rank(passing)
    g1_needed = d_eff + 1
    verdict = len(passing) >= g1_needed and rank_g2 == d_eff + 1

    summaries = [CellSummary(cell.cell_id, cell.n_rows, cell.exact, cell.qualifies, cell.rank,
                             cell.rank_info.gap, cell.qualifies and cell.rank >= needed_rank) for cell in systems]
    report = IdentReport(
        n_menus=matrix.n_menus,
        n_rules=matrix.n_rules,
        two_sided_fraction=float(two_sided.mean()),
        coverage=rule_coverage(matrix),
        n_cells=assignment.n_cells,
        n_qualifying=sum(cell.qualifies for cell in systems),
        g1_pass_count=len(passing),
        g1_needed=g1_needed,
        g1_full_rank_count=sum(cell.rank >= matrix.n_rules for cell in passing),
        g2_rank=rank_g2,
        d_eff=d_eff,
        verdict=verdict,
        cells=summaries,
        clustering=assignment.settings,
    )
    LOG.info(f"Identification: D1={report.two_sided_fraction:.3f}, G1 {report.g1_pass_count}/{g1_needed} "
             f"({report.g1_full_rank_count} full rank), "
             f"G2 {rank_g2}/{d_eff + 1}, verdict={verdict}")
    return report
