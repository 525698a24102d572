from rrmtools.estimation.first_stage import DEFAULT_FLOOR, CellWeights, cell_weights, solve_normalized_qp, \
    weights_from_rows
from rrmtools.estimation.second_stage import JTest, SecondStage, design_matrix, j_test, second_stage
from rrmtools.estimation.two_step import BootstrapConfig, BootstrapResult, TwoStepConfig, TwoStepFit, bootstrap_se, \
    build_problem, compare_weights, estimate, fit_two_step, params_from_gamma, two_step_responsibilities
