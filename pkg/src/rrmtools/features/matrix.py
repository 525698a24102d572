from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.data_manage.dataset import Dataset
from rrmtools.errors import SchemaViolation
from rrmtools.features.covariates import menu_covariates
from rrmtools.features.gate_features import GATE_FEATURE_NAMES, RAW_FEATURE_NAMES, gate_features, raw_encoding

GATE_ENCODING = "gate"
RAW_ENCODING = "raw"


def feature_matrix(dataset: Dataset, encoding: str = GATE_ENCODING, factor: Optional[float] = None) -> FloatArray:
    """
    Gate inputs for every menu (rows follow the dataset). An oracle feature override carried by
    synthetic datasets replaces the computed gate features.
    """
    factor = dataset.rescale_factor if factor is None else factor
    if encoding == GATE_ENCODING:
        if dataset.feature_override is not None:
            return np.asarray(dataset.feature_override, dtype=np.float64)
        return np.vstack([gate_features(menu, factor) for menu in dataset.menus])
    elif encoding == RAW_ENCODING:
        return np.vstack([raw_encoding(menu, factor) for menu in dataset.menus])

    raise ValueError(f"Unsupported encoding: {encoding}")


def feature_names(encoding: str, dim: int) -> tuple[str, ...]:
    names = GATE_FEATURE_NAMES if encoding == GATE_ENCODING else RAW_FEATURE_NAMES
    if len(names) == dim:
        return names
    return tuple(f"z_{i + 1}" for i in range(dim))


def covariate_matrix(dataset: Dataset) -> dict[str, FloatArray]:
    covariates = [menu_covariates(menu) for menu in dataset.menus]
    return {
        "tc": np.array([c.tc for c in covariates]),
        "risk_asym": np.array([c.risk_asym for c in covariates]),
    }


def feature_dump_frame(dataset: Dataset) -> pd.DataFrame:
    z = feature_matrix(dataset)
    frame = pd.DataFrame(z, columns=[f"z_{i + 1}" for i in range(z.shape[1])])
    frame.insert(0, "menu_id", list(dataset.ids))
    for name, values in covariate_matrix(dataset).items():
        frame[name] = values
    return frame


def write_feature_dump(dataset: Dataset, path: str | Path):
    feature_dump_frame(dataset).to_csv(path, index=False)


def read_feature_override(dataset: Dataset, path: str | Path) -> Dataset:
    """Attaches the z_* columns of a feature dump as the dataset's oracle features, matched by menu_id."""
    frame = pd.read_csv(path, dtype={"menu_id": str})
    columns = [column for column in frame.columns if column.startswith("z_")]
    if "menu_id" not in frame.columns or not columns:
        raise SchemaViolation(f"{path} is not a feature dump (menu_id, z_1, ...)")
    frame = frame.set_index("menu_id")
    missing = [menu_id for menu_id in dataset.ids if menu_id not in frame.index]
    if missing:
        raise SchemaViolation(f"{path} has no features for {len(missing)} menus, e.g. {missing[0]}")
    return replace(dataset, feature_override=frame.loc[list(dataset.ids), columns].to_numpy(dtype=np.float64))
