import argparse
import sys
from dataclasses import asdict, dataclass, replace
from typing import Any, Optional, Sequence

from globalog import LOG

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.common.json_io import dumps_json, read_json
from rrmtools.config import RunConfig
from rrmtools.data_manage.dataset import Dataset
from rrmtools.data_manage.loader import CANONICAL, CHOICES13K, CPC18, load_csv
from rrmtools.data_manage.schema import RunRecord
from rrmtools.data_manage.synthetic import draw_params, generate_synthetic
from rrmtools.diagnostics import ablate, completeness, comparative_statics, concentration, crossfit_topk, \
    decomposition_stability, placebo_comparison, restrictiveness
from rrmtools.errors import ValidationError
from rrmtools.estimation import compare_weights, fit_two_step
from rrmtools.evaluation import ChoiceModel, ConstantModel, LookupTableModel, RuleGatingModel, learning_curve, \
    paired_comparison, portability, run_cv
from rrmtools.features import GATE_FEATURE_NAMES
from rrmtools.features.matrix import GATE_ENCODING, RAW_ENCODING, feature_matrix, feature_names, \
    read_feature_override
from rrmtools.gate import GateParams, responsibilities, train
from rrmtools.identification import ident_report, jacobian_local_rank
from rrmtools.reporting import init_report
from rrmtools.reporting.outputs import report_ablation, report_activity, report_coverage, report_crossfit, \
    report_features, report_ident, report_learning_curve, report_menus, report_params, report_responsibilities, \
    report_rule_matrix, report_run_record, report_selection, report_stability, report_statics, report_summary, \
    report_two_step
from rrmtools.rules import ALL_RULES, RuleId, RuleMatrix, activity_sweep, build_rule_matrix, parse_rule_list, \
    rule_coverage, two_sided_mask

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2

SCHEMAS = (CANONICAL, CHOICES13K, CPC18)
MODELS = ("rule-gating", "constant", "lookup")
COVARIATES = ("tc", "risk_asym")


@dataclass(frozen=True, eq=False)
class Design:
    dataset: Dataset
    matrix: RuleMatrix
    features: FloatArray
    feature_names: tuple[str, ...]
    encoding: str


def load_dataset(args: argparse.Namespace) -> Dataset:
    dataset = load_csv(args.data, args.schema, args.delimiter, args.trials)
    if args.features:
        dataset = read_feature_override(dataset, args.features)
    return dataset


def library(args: argparse.Namespace, config: RunConfig) -> tuple[RuleId, ...]:
    text = args.exclude if getattr(args, "exclude", None) is not None else ",".join(config.exclude)
    excluded = set(parse_rule_list(text))
    rules = tuple(rule for rule in ALL_RULES if rule not in excluded)
    if not rules:
        raise ValidationError("the rule library is empty after exclusions")
    return rules


def build_design(args: argparse.Namespace, config: RunConfig, dataset: Dataset) -> Design:
    encoding = getattr(args, "encoding", None) or config.encoding
    epsilon = config.epsilon if getattr(args, "epsilon", None) is None else args.epsilon
    matrix = build_rule_matrix(dataset.menus, epsilon=epsilon, rules=library(args, config), threads=config.threads)
    features = feature_matrix(dataset, encoding)
    return Design(dataset, matrix, features, feature_names(encoding, features.shape[1]), encoding)


def design_for_params(dataset: Dataset, params: GateParams, threads: int) -> Design:
    """Rule matrix and features built the way the frozen parameters were fitted."""
    matrix = build_rule_matrix(dataset.menus, epsilon=params.epsilon, rules=params.rules, threads=threads)
    features = feature_matrix(dataset, params.encoding, factor=params.rescale_factor)
    return Design(dataset, matrix, features, params.feature_names, params.encoding)


def gating_model(design: Design, config: RunConfig) -> RuleGatingModel:
    return RuleGatingModel(design.matrix, design.features, config.train, design.feature_names,
                           design.dataset.rescale_factor, design.encoding)


def choice_model(kind: str, design: Design, config: RunConfig) -> ChoiceModel:
    if kind == "rule-gating":
        return gating_model(design, config)
    elif kind == "constant":
        return ConstantModel()
    elif kind == "lookup":
        return LookupTableModel()

    else:
        raise ValueError(f"Unsupported model: {kind}")


def learning_rate(args: argparse.Namespace, config: RunConfig) -> float:
    if getattr(args, "lr", None) is not None:
        return args.lr
    if getattr(args, "run_record", None):
        return RunRecord.from_json(read_json(args.run_record)).selected_learning_rate
    return config.train.learning_rate


def emit(summary: dict[str, Any]):
    report_summary(summary)
    print(dumps_json(summary))


def cmd_ingest(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    report_menus(dataset)
    report_features(dataset)
    report_rule_matrix(design.matrix)
    report_coverage(rule_coverage(design.matrix))
    emit({
        "dataset": dataset.name,
        "n_menus": len(dataset),
        "n_trials": None if dataset.trials is None else len(dataset.trials),
        "rescale_factor": dataset.rescale_factor,
        "mean_active_rules": design.matrix.mean_active_rules(),
        "two_sided_fraction": float(two_sided_mask(design.matrix).mean()),
        "provenance": dataset.provenance,
    })


def cmd_fit(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    lr = learning_rate(args, config)
    result = train(design.matrix, design.features, dataset.targets(), config.train, design.feature_names,
                   dataset.rescale_factor, design.encoding, lr)
    params = result.params
    if RuleId.A1 in params.rules:
        params = params.normalized(RuleId.A1)
    weights = responsibilities(params, design.features, design.matrix)
    conc = concentration(weights.weights, params.rules)
    report_params(params)
    report_responsibilities(weights)
    emit({"dataset": dataset.name, "learning_rate": lr, "train_mse": result.final_mse, **conc.as_dict(),
          "guard_excluded": weights.n_excluded})


def cmd_cv(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    model = choice_model(args.model, design, config)
    record = run_cv(dataset, model, config.splits, config.train.lr_grid, config.threads, config.snapshot())
    report_run_record(record)
    summary = {"dataset": dataset.name, "model": model.name, "selected_learning_rate": record.selected_learning_rate,
               "mean_test_mse": record.mean_test_mse, "sd_test_mse": record.sd_test_mse,
               "mean_test_mse_w": record.mean_test_mse_w}
    try:
        summary["completeness"] = completeness(record.mean_test_mse, config.bench)
    except ValidationError as e:
        LOG.warning(f"completeness not reported: {e}")
    if args.curve:
        points = learning_curve(dataset, model, config.splits, record.selected_learning_rate,
                                config.curve_fractions, config.threads)
        report_learning_curve(points)
        summary["learning_curve"] = [asdict(point) for point in points]
    if args.compare:
        other = RunRecord.from_json(read_json(args.compare))
        summary["paired_comparison"] = paired_comparison(record, other).as_dict()
    emit(summary)


def cmd_two_step(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    settings = config.two_step
    if args.cells is not None:
        settings = replace(settings, n_cells=args.cells)
    if settings.bootstrap is not None and (args.resamples is not None or args.scheme is not None):
        settings = replace(settings, bootstrap=replace(
            settings.bootstrap,
            resamples=args.resamples if args.resamples is not None else settings.bootstrap.resamples,
            scheme=args.scheme or settings.bootstrap.scheme))
    fit = fit_two_step(dataset, design.matrix, design.features, settings, design.feature_names)

    mse_weights, agreement = None, None
    if args.mse_params:
        mse_params = GateParams.load(args.mse_params)
        mse_weights = responsibilities(mse_params, design.features, design.matrix).weights
        agreement = asdict(compare_weights(fit.weights, mse_weights))
    report_two_step(fit, mse_weights, agreement)
    emit({"dataset": dataset.name, "n_cells": fit.n_cells, "d_eff": fit.d_eff,
          "w_two_step": fit.responsibilities.as_dict(), "agreement_with_mse_fit": agreement, "flags": fit.flags})


def cmd_diagnose(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    cells = args.cells if args.cells is not None else config.two_step.n_cells
    ident = ident_report(dataset, design.matrix, design.features, cells, config.two_step.trim, config.seed)
    report_ident(ident)
    report_coverage(ident.coverage)
    print(ident.to_text())
    summary: dict[str, Any] = {"dataset": dataset.name, "verdict": ident.verdict, "d_eff": ident.d_eff,
                               "g1_pass_count": ident.g1_pass_count,
                               "g1_full_rank_count": ident.g1_full_rank_count, "g2_rank": ident.g2_rank}
    if args.sweep:
        rates = dataset.targets() if dataset.has_targets else None
        points = activity_sweep(dataset.menus, config.activity_epsilons, design.matrix.rules, rates, config.threads)
        report_activity(points)
    if args.params:
        params = GateParams.load(args.params)
        local = design_for_params(dataset, params, config.threads)
        rank = jacobian_local_rank(params, local.features, local.matrix)
        summary["jacobian"] = {"rank": rank.rank, "n_columns": rank.n_columns,
                               "n_columns_effective": rank.n_columns_effective,
                               "full_effective_rank": rank.full_effective_rank}
    report_summary(summary)


def cmd_ablate(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    model = gating_model(build_design(args, config, dataset), config)
    rules = parse_rule_list(args.rules) if args.rules else None
    result = ablate(dataset, model, config.splits, learning_rate(args, config), rules, config.threads)
    stability = decomposition_stability(result.rules, result.fold_weights, result) \
        if len(result.fold_weights) > 1 else None
    report_ablation(result)
    if stability is not None:
        report_stability(stability)
    emit({"dataset": dataset.name, "full_mse": result.full_mse, "n_eff": result.n_eff,
          "entries": [dict(zip(entry.headers(), entry.as_row())) for entry in result.entries],
          "spearman_mean": None if stability is None else stability.spearman_mean})


def cmd_crossfit(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    model = gating_model(build_design(args, config, dataset), config)
    result = crossfit_topk(dataset, model, config.splits, learning_rate(args, config), config.topk,
                           config.family_topk, config.threads)
    report_crossfit(result)
    report_selection(result)
    emit({"dataset": dataset.name, "full_mse": result.full_mse,
          "rows": [dict(zip(row.headers(), row.as_row())) for row in result.rows]})


def cmd_statics(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    if args.params:
        params = GateParams.load(args.params)
        design = design_for_params(dataset, params, config.threads)
    else:
        design = build_design(args, config, dataset)
        params = train(design.matrix, design.features, dataset.targets(), config.train, design.feature_names,
                       dataset.rescale_factor, design.encoding, learning_rate(args, config)).params
    statics = comparative_statics(params, dataset, design.features, design.matrix, args.covariate, config.k_bins)
    report_statics(statics)
    emit({"dataset": dataset.name, "covariate": statics.covariate, "n_bins": len(statics.counts),
          "bin_counts": statics.counts, "guard_excluded": statics.n_excluded, "degenerate": statics.degenerate})


def cmd_restrictiveness(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    design = build_design(args, config, dataset)
    model = choice_model(args.model, design, config)
    permutations = args.permutations if args.permutations is not None else config.permutations
    result = restrictiveness(dataset, model, config.splits, learning_rate(args, config), permutations,
                             config.seed, config.threads)
    emit({"dataset": dataset.name, **result.as_dict()})


def cmd_portability(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    params = GateParams.load(args.params)
    result = portability(params, dataset, args.factor, config.threads)
    emit(result.as_dict())


def cmd_synth(args: argparse.Namespace, config: RunConfig):
    if args.params:
        params = GateParams.load(args.params)
    else:
        params = draw_params(library(args, config), GATE_FEATURE_NAMES, seed=config.seed)
    generator = config.synthetic
    overrides = {"n_cells": args.cells, "menus_per_cell": args.menus_per_cell, "curvature": args.curvature}
    generator = replace(generator, **{key: value for key, value in overrides.items() if value is not None})
    generator = replace(generator, noiseless=args.noiseless or generator.noiseless,
                        with_trials=args.with_trials or generator.with_trials)
    dataset = generate_synthetic(params, generator, args.n_trials, config.seed)
    report_menus(dataset)
    report_features(dataset)
    report_params(params)
    emit({"dataset": dataset.name, "n_menus": len(dataset), **dataset.provenance})


def cmd_placebo(args: argparse.Namespace, config: RunConfig):
    dataset = load_dataset(args)
    model = gating_model(build_design(args, config, dataset), config)
    strata = args.strata if args.strata is not None else config.placebo_strata
    result = placebo_comparison(dataset, model, config.splits, learning_rate(args, config), strata, config.seed,
                                config.threads)
    emit({"dataset": dataset.name, **result.as_dict()})


def _global_args(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output folder")
    parser.add_argument("--config", default=argparse.SUPPRESS, help="versioned JSON run config")


def _data_args(parser: argparse.ArgumentParser, fitting: bool = True):
    parser.add_argument("data", help="input CSV")
    parser.add_argument("--schema", choices=SCHEMAS, default=CANONICAL)
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--trials", help="trial file for the canonical schema (menu_id, chose_left)")
    parser.add_argument("--features", help="feature dump whose z_* columns replace the computed gate features")
    if fitting:
        parser.add_argument("--encoding", choices=(GATE_ENCODING, RAW_ENCODING))
        parser.add_argument("--exclude", help="comma-separated rules removed from the library, e.g. A1,A2")
        parser.add_argument("--epsilon", type=float, help="dominance margin; negative treats every rule as active")


def _lr_args(parser: argparse.ArgumentParser):
    parser.add_argument("--lr", type=float, help="learning rate (default: config train.learning_rate)")
    parser.add_argument("--run-record", help="take the learning rate selected in this cv run record")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrmtools", description="Rule-gating choice models over binary lotteries")
    _global_args(parser)
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        _global_args(sub)
        sub.set_defaults(handler=handler)
        return sub

    sub = command("ingest", cmd_ingest, "load a dataset and write canonical menus, rule matrix and features")
    _data_args(sub)

    sub = command("fit", cmd_fit, "fit the gate on every menu")
    _data_args(sub)
    _lr_args(sub)

    sub = command("cv", cmd_cv, "two-pass cross-validation")
    _data_args(sub)
    sub.add_argument("--model", choices=MODELS, default="rule-gating")
    sub.add_argument("--curve", action="store_true", help="also run the learning curve at the selected rate")
    sub.add_argument("--compare", help="run record to compare against split by split")

    sub = command("two-step", cmd_two_step, "cellwise two-step estimation with bootstrap and J-tests")
    _data_args(sub)
    sub.add_argument("--cells", type=int)
    sub.add_argument("--resamples", type=int)
    sub.add_argument("--scheme", choices=("menus", "trials"))
    sub.add_argument("--mse-params", help="gate params from an MSE fit to compare weights with")

    sub = command("diagnose", cmd_diagnose, "identification report")
    _data_args(sub)
    sub.add_argument("--cells", type=int)
    sub.add_argument("--sweep", action="store_true", help="activity sweep over the configured epsilons")
    sub.add_argument("--params", help="gate params for the local Jacobian rank")

    sub = command("ablate", cmd_ablate, "refit-and-compare ablation of each rule")
    _data_args(sub)
    _lr_args(sub)
    sub.add_argument("--rules", help="comma-separated rules to ablate (default: all non-attention rules)")

    sub = command("crossfit", cmd_crossfit, "cross-fitted top-k library restriction")
    _data_args(sub)
    _lr_args(sub)

    sub = command("statics", cmd_statics, "mean responsibilities across covariate bins")
    _data_args(sub)
    _lr_args(sub)
    sub.add_argument("--covariate", choices=COVARIATES, default="tc")
    sub.add_argument("--params", help="frozen gate params (default: fit on every menu)")

    sub = command("restrictiveness", cmd_restrictiveness, "permutation-fit restrictiveness")
    _data_args(sub)
    _lr_args(sub)
    sub.add_argument("--model", choices=MODELS, default="rule-gating")
    sub.add_argument("--permutations", type=int)

    sub = command("portability", cmd_portability, "score frozen params on another dataset")
    _data_args(sub, fitting=False)
    sub.add_argument("--params", required=True, help="frozen gate params")
    sub.add_argument("--factor", type=float, help="rescale factor to check against the frozen one")

    sub = command("synth", cmd_synth, "generate a synthetic dataset from a gate")
    sub.add_argument("--params", help="true gate params (default: random draw)")
    sub.add_argument("--exclude", help="rules left out of a randomly drawn gate")
    sub.add_argument("--n-trials", type=int, default=100)
    sub.add_argument("--cells", type=int)
    sub.add_argument("--menus-per-cell", type=int)
    sub.add_argument("--curvature", type=float)
    sub.add_argument("--noiseless", action="store_true")
    sub.add_argument("--with-trials", action="store_true")

    sub = command("placebo", cmd_placebo, "real vs placebo rule library")
    _data_args(sub)
    _lr_args(sub)
    sub.add_argument("--strata", type=int)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.resolve(getattr(args, "config", None))
        config = config.with_overrides(seed=getattr(args, "seed", None), threads=getattr(args, "threads", None))
        init_report(getattr(args, "out", None), name=args.command)
        args.handler(args, config)
    except ValidationError as e:
        LOG.error(f"{args.command}: {e}")
        return EXIT_VALIDATION
    except Exception as e:
        LOG.error(f"{args.command} failed: {e}", exc_info=e)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
