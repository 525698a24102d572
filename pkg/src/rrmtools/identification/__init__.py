from rrmtools.identification.restrictions import DEFAULT_TRIM, RestrictionRow, odds, restriction_matrix, \
    restriction_row
from rrmtools.identification.rank import FeatureBasis, RankInfo, cell_rank, effective_basis, numerical_rank
from rrmtools.identification.cells import CellAssignment, CellSystem, build_cells, cell_systems
from rrmtools.identification.report import IdentReport, ident_report
from rrmtools.identification.jacobian import JacobianRank, jacobian_local_rank, log_odds, log_odds_jacobian
