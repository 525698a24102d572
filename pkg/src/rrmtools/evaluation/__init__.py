from rrmtools.evaluation.splits import Split, SplitPlan, make_splits
from rrmtools.evaluation.metrics import Metrics, brier, log_loss, metrics
from rrmtools.evaluation.models import ChoiceModel, ConstantModel, FittedGate, FittedModel, LookupTableModel, \
    RuleGatingModel
from rrmtools.evaluation.cv import CurvePoint, FoldFit, PairedComparison, fit_fold, fit_folds, learning_curve, \
    paired_comparison, run_cv
from rrmtools.evaluation.portability import PortabilityReport, portability
