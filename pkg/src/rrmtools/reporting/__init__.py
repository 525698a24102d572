from rrmtools.reporting.reporter import ReportWriter, Reporter, init_report, report
