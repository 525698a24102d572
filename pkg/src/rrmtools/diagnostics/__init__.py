from rrmtools.diagnostics.concentration import ConcentrationReport, concentration
from rrmtools.diagnostics.completeness import BenchmarkScores, completeness
from rrmtools.diagnostics.restrictiveness import RestrictivenessReport, restrictiveness
from rrmtools.diagnostics.ablation import AblationEntry, AblationReport, ablate
from rrmtools.diagnostics.statics import StaticsReport, comparative_statics
from rrmtools.diagnostics.crossfit import CrossfitReport, CrossfitRow, crossfit_topk, top_families, top_rules
from rrmtools.diagnostics.stability import StabilityReport, decomposition_stability
from rrmtools.diagnostics.placebo import PlaceboComparison, placebo_comparison
