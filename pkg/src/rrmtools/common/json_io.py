import json
from pathlib import Path
from typing import Any

import numpy as np

from rrmtools.common.ext.typing_ext import JSON


def _to_builtin(obj: Any) -> JSON:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps_json(data: Any, indent: int | None = 2) -> str:
    return json.dumps(data, indent=indent, default=_to_builtin)


def write_json(data: Any, path: str | Path, indent: int | None = 2):
    with open(path, 'w') as f:
        json.dump(data, f, indent=indent, default=_to_builtin)


def read_json(path: str | Path) -> JSON:
    with open(path) as f:
        return json.load(f)
