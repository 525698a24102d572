from typing import Any, Optional, Sequence

from rrmtools.data_manage.dataset import Dataset
from rrmtools.data_manage.loader import write_canonical_csv
from rrmtools.data_manage.schema import RunRecord
from rrmtools.diagnostics import AblationEntry, AblationReport, CrossfitReport, CrossfitRow, StabilityReport, \
    StaticsReport
from rrmtools.estimation import TwoStepFit
from rrmtools.evaluation.cv import CurvePoint
from rrmtools.features.matrix import write_feature_dump
from rrmtools.gate import GateParams, ResponsibilityReport
from rrmtools.identification import IdentReport
from rrmtools.reporting.reporter import ReportWriter, report
from rrmtools.rules import ActivityPoint, RuleCoverage, RuleMatrix, write_rule_matrix_csv


@report("summary")
def report_summary(writer: ReportWriter, summary: dict[str, Any]):
    writer.write_json(summary)


@report("menus.csv")
def report_menus(writer: ReportWriter, dataset: Dataset):
    trials_path = writer.filepath.with_name("trials.csv") if dataset.trials is not None else None
    write_canonical_csv(dataset, writer.filepath, trials_path)


@report("features.csv")
def report_features(writer: ReportWriter, dataset: Dataset):
    write_feature_dump(dataset, writer.filepath)


@report("rule_matrix.csv")
def report_rule_matrix(writer: ReportWriter, matrix: RuleMatrix):
    write_rule_matrix_csv(matrix, writer.filepath)


@report("coverage")
def report_coverage(writer: ReportWriter, coverage: Sequence[RuleCoverage]):
    writer.write_csv([row.as_row() for row in coverage], RuleCoverage.headers())


@report("activity_sweep")
def report_activity(writer: ReportWriter, points: Sequence[ActivityPoint]):
    writer.write_csv([point.as_row() for point in points], ActivityPoint.headers())


@report("gate_params")
def report_params(writer: ReportWriter, params: GateParams):
    params.save(writer.filepath.with_suffix('.json'))


@report("responsibilities")
def report_responsibilities(writer: ReportWriter, responsibility: ResponsibilityReport):
    writer.write_csv(responsibility.rows(), ResponsibilityReport.headers())


@report("run_record")
def report_run_record(writer: ReportWriter, record: RunRecord):
    writer.write_json(record.to_json())


@report("learning_curve")
def report_learning_curve(writer: ReportWriter, points: Sequence[CurvePoint]):
    writer.write_csv([point.as_row() for point in points], CurvePoint.headers())


@report("two_step")
def report_two_step(writer: ReportWriter, fit: TwoStepFit, mse_weights=None, agreement: Optional[dict] = None):
    document = fit.to_json()
    if agreement is not None:
        document["agreement_with_mse_fit"] = agreement
    writer.write_json(document)
    writer.write_csv(fit.table_rows(mse_weights), TwoStepFit.table_headers())


@report("ident_report.txt")
def report_ident(writer: ReportWriter, ident: IdentReport):
    writer.write_json(ident.to_json())
    writer.write_plain_text(ident.to_text())


@report("ablation")
def report_ablation(writer: ReportWriter, ablation: AblationReport):
    writer.write_csv([entry.as_row() for entry in ablation.entries], AblationEntry.headers())


@report("stability")
def report_stability(writer: ReportWriter, stability: StabilityReport):
    writer.write_csv(stability.rows(), StabilityReport.headers())


@report("crossfit")
def report_crossfit(writer: ReportWriter, crossfit: CrossfitReport):
    writer.write_csv([row.as_row() for row in crossfit.rows], CrossfitRow.headers())


@report("selection_frequencies")
def report_selection(writer: ReportWriter, crossfit: CrossfitReport):
    writer.write_csv(crossfit.frequency_rows(), crossfit.frequency_headers())


@report("statics")
def report_statics(writer: ReportWriter, statics: StaticsReport):
    writer.write_csv(statics.long_rows(), StaticsReport.headers())
