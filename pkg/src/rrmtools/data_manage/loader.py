from abc import ABC, abstractmethod
from pathlib import Path
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd
from globalog import LOG

from rrmtools.data_manage.dataset import Dataset, TrialSet
from rrmtools.errors import EmptyDataset, ParseError, SchemaViolation, ValidationError
from rrmtools.lottery import Menu, canonicalize

_T = TypeVar('_T')

CANONICAL = "canonical"
CHOICES13K = "choices13k"
CPC18 = "cpc18"

CANONICAL_COLUMNS = ("menu_id", "left_outcomes", "left_probs", "right_outcomes", "right_probs", "n_trials",
                     "left_choice_rate")
TRIAL_COLUMNS = ("menu_id", "chose_left")
LIST_SEPARATOR = ";"


def read_table(path: str | Path, delimiter: str = ",", dtype=str) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"input file not found: {path}")
    try:
        return pd.read_csv(path, sep=delimiter, dtype=dtype, keep_default_na=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read {path}: {e}") from e


def require_columns(frame: pd.DataFrame, columns: Sequence[str], source: str):
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise SchemaViolation(f"{source} is missing columns {missing}")


def parse_row(row: int, parse: Callable[[], _T]) -> _T:
    """Runs a row parser, attaching the 1-based data row number to whatever it raises."""
    try:
        return parse()
    except ParseError:
        raise
    except ValidationError as e:
        raise type(e)(f"row {row}: {e}") from e
    except (ValueError, TypeError, KeyError) as e:
        raise ParseError(str(e), row) from e


def _floats(text: str) -> list[float]:
    return [float(item) for item in text.split(LIST_SEPARATOR) if item.strip() != ""]


def _optional(text: str, cast: Callable[[str], _T]) -> Optional[_T]:
    text = text.strip()
    return None if text == "" else cast(text)


class DatasetLoader(ABC):
    schema: str

    def __init__(self, delimiter: str = ","):
        self.delimiter = delimiter

    @abstractmethod
    def load(self, path: str | Path) -> Dataset:
        """Read a source file into a dataset of canonical menus."""
        raise NotImplementedError()


class CanonicalLoader(DatasetLoader):
    """
    One menu per row. Lottery columns hold semicolon-joined payoffs and probabilities; `n_trials`
    and `left_choice_rate` may be empty for prediction-only datasets. An optional trial file
    (menu_id, chose_left) attaches individual choices.
    """
    schema = CANONICAL

    def __init__(self, delimiter: str = ",", trials_path: Optional[str | Path] = None):
        super().__init__(delimiter)
        self.trials_path = trials_path

    def _menu(self, record: dict) -> Menu:
        left = canonicalize(_floats(record["left_outcomes"]), _floats(record["left_probs"]))
        right = canonicalize(_floats(record["right_outcomes"]), _floats(record["right_probs"]))
        rate = _optional(record["left_choice_rate"], float)
        n_trials = _optional(record["n_trials"], lambda text: int(float(text)))
        return Menu(record["menu_id"].strip(), left, right, rate, n_trials)

    def _trials(self, ids: Sequence[str]) -> TrialSet:
        frame = read_table(self.trials_path, self.delimiter)
        require_columns(frame, TRIAL_COLUMNS, str(self.trials_path))
        position = {menu_id: i for i, menu_id in enumerate(ids)}
        index, chose = [], []
        for row, record in enumerate(frame.to_dict("records"), start=1):
            menu_id = record["menu_id"].strip()
            if menu_id not in position:
                raise ParseError(f"trial refers to unknown menu {menu_id}", row)
            index.append(position[menu_id])
            chose.append(parse_row(row, lambda: int(float(record["chose_left"]))))
        return TrialSet(np.array(index, dtype=np.int64), np.array(chose, dtype=np.int64))

    def load(self, path: str | Path) -> Dataset:
        frame = read_table(path, self.delimiter)
        require_columns(frame, CANONICAL_COLUMNS, str(path))
        menus = [parse_row(row, lambda: self._menu(record))
                 for row, record in enumerate(frame.to_dict("records"), start=1)]
        if not menus:
            raise EmptyDataset(f"{path} holds no menus")
        trials = None if self.trials_path is None else self._trials([menu.id for menu in menus])
        provenance = {"source": str(path), "schema": self.schema, "rows_read": len(frame)}
        dataset = Dataset.build(Path(path).stem, menus, provenance, trials)
        LOG.info(f"Loaded {len(dataset)} menus from {path} (rescale factor {dataset.rescale_factor:.4g})")
        return dataset


def _join(values: Sequence[float]) -> str:
    return LIST_SEPARATOR.join(repr(float(v)) for v in values)


def canonical_frame(dataset: Dataset) -> pd.DataFrame:
    return pd.DataFrame([{
        "menu_id": menu.id,
        "left_outcomes": _join(menu.left.outcomes),
        "left_probs": _join(menu.left.probs),
        "right_outcomes": _join(menu.right.outcomes),
        "right_probs": _join(menu.right.probs),
        "n_trials": "" if menu.n_trials is None else menu.n_trials,
        "left_choice_rate": "" if menu.choice_rate is None else repr(float(menu.choice_rate)),
    } for menu in dataset.menus], columns=list(CANONICAL_COLUMNS))


def write_canonical_csv(dataset: Dataset, path: str | Path, trials_path: Optional[str | Path] = None):
    """Writes a dataset in the canonical schema (and its trials, when present and a path is given)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    canonical_frame(dataset).to_csv(path, index=False)
    if trials_path is not None and dataset.trials is not None:
        ids = np.array(dataset.ids, dtype=object)
        pd.DataFrame({"menu_id": ids[dataset.trials.menu_index], "chose_left": dataset.trials.chose_left}) \
            .to_csv(trials_path, index=False)
    LOG.info(f"Wrote {len(dataset)} menus to {path}")


class LoaderFactory:
    @staticmethod
    def get_loader(schema: str, delimiter: str = ",", trials_path: Optional[str | Path] = None) -> DatasetLoader:
        schema = schema.lower()
        if schema == CANONICAL:
            return CanonicalLoader(delimiter, trials_path)
        elif schema == CHOICES13K:
            from rrmtools.data_manage.cpc import Choices13kLoader
            return Choices13kLoader(delimiter)
        elif schema == CPC18:
            from rrmtools.data_manage.cpc import Cpc18Loader
            return Cpc18Loader(delimiter)

        else:
            raise ValueError(f"Unsupported schema: {schema}")


def load_csv(path: str | Path, schema: str = CANONICAL, delimiter: str = ",",
             trials_path: Optional[str | Path] = None) -> Dataset:
    return LoaderFactory.get_loader(schema, delimiter, trials_path).load(path)
