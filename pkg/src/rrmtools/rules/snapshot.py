from pathlib import Path

import numpy as np
import pandas as pd

from rrmtools.errors import SchemaViolation
from rrmtools.rules.rule_id import RuleId, sort_rules
from rrmtools.rules.rule_matrix import RuleMatrix


def rule_matrix_frame(matrix: RuleMatrix) -> pd.DataFrame:
    columns = {"menu_id": list(matrix.menu_ids)}
    for j, rule in enumerate(matrix.rules):
        columns[f"{rule.value}_active"] = matrix.active[:, j].astype(int)
        columns[f"{rule.value}_left"] = matrix.left[:, j].astype(int)
    return pd.DataFrame(columns)


def write_rule_matrix_csv(matrix: RuleMatrix, path: str | Path):
    rule_matrix_frame(matrix).to_csv(path, index=False)


def read_rule_matrix_csv(path: str | Path, epsilon: float, big_m: float) -> RuleMatrix:
    frame = pd.read_csv(path, dtype={"menu_id": str})
    if "menu_id" not in frame.columns:
        raise SchemaViolation(f"{path}: missing menu_id column")

    names = [column[:-len("_active")] for column in frame.columns if column.endswith("_active")]
    rules = sort_rules(RuleId.parse(name) for name in names)
    missing = [f"{rule.value}_left" for rule in rules if f"{rule.value}_left" not in frame.columns]
    if missing:
        raise SchemaViolation(f"{path}: missing columns {missing}")

    active = np.column_stack([frame[f"{rule.value}_active"].to_numpy() == 1 for rule in rules])
    left = np.column_stack([frame[f"{rule.value}_left"].to_numpy() == 1 for rule in rules])
    return RuleMatrix(tuple(frame["menu_id"]), rules, active, left, epsilon, big_m)
