"""
Adapters for the CPC-style problem descriptions used by choices13k and CPC18.

Each option is described by a high payoff H with probability pH, a low payoff L, a lottery shape and a
number of lottery outcomes. Assumed column semantics:

    column                  meaning
    Ha, pHa, La             option A (left): high payoff, its probability, low payoff
    LotShapeA, LotNumA      option A lottery shape ('-', 'Symm', 'L-skew', 'R-skew' or codes 0..3) and size
    Hb, pHb, Lb, ...        the same for option B (right)
    Amb                     ambiguous problem flag (dropped)
    Feedback                choices13k: feedback was shown (kept when true)
    bRate, n                choices13k: share choosing B, number of subjects
    GameID, B               CPC18 trials: problem id, 1 when B was chosen
"""
from pathlib import Path

import numpy as np
import pandas as pd
from globalog import LOG
from scipy.stats import binom

from rrmtools.data_manage.dataset import Dataset, TrialSet
from rrmtools.data_manage.loader import CHOICES13K, CPC18, DatasetLoader, parse_row, read_table, require_columns
from rrmtools.errors import EmptyDataset, ParseError, SchemaViolation
from rrmtools.lottery import Lottery, Menu, canonicalize

LOTTERY_COLUMNS = ("Ha", "pHa", "La", "LotShapeA", "LotNumA", "Hb", "pHb", "Lb", "LotShapeB", "LotNumB")
CHOICES13K_COLUMNS = ("Problem", "Feedback", "Amb", "n", "bRate") + LOTTERY_COLUMNS
CPC18_COLUMNS = ("GameID", "Amb", "B") + LOTTERY_COLUMNS

SHAPE_CODES = {"0": "-", "1": "Symm", "2": "L-skew", "3": "R-skew"}
SHAPES = ("-", "Symm", "L-skew", "R-skew")
_TRUE = {"true", "1", "1.0", "yes"}


def _shape(value) -> str:
    text = str(value).strip()
    text = SHAPE_CODES.get(text.split(".")[0], text) if text[:1].isdigit() else text
    if text not in SHAPES:
        raise ValueError(f"unknown lottery shape {value!r}")
    return text


def _flag(series: pd.Series) -> pd.Series:
    return series.astype(str).str.strip().str.lower().isin(_TRUE)


def expand_lottery(high: float, p_high: float, low: float, shape: str, lot_num: int) -> Lottery:
    """
    Outcome distribution of one option. The high payoff H is replaced by a lottery with mean H:
    symmetric binomial around H, or a geometric left/right skew; L keeps probability 1 - pH.
    """
    shape = _shape(shape)
    outcomes, probs = [], []
    if shape == "-" or lot_num <= 1:
        outcomes.append(high)
        probs.append(p_high)
    elif shape == "Symm":
        k = lot_num - 1
        for i in range(k + 1):
            outcomes.append(high - k / 2 + i)
            probs.append(p_high * binom.pmf(i, k, 0.5))
    else:
        offset = -1 - lot_num if shape == "R-skew" else 1 + lot_num
        sign = 1 if shape == "R-skew" else -1
        for i in range(1, lot_num + 1):
            outcomes.append(high + offset + sign * 2 ** i)
            probs.append(p_high / 2 ** i)
        probs[-1] *= 2
    if p_high < 1:
        outcomes.append(low)
        probs.append(1 - p_high)
    return canonicalize(outcomes, probs)


def menu_from_record(menu_id: str, record: dict, rate: float | None = None, n_trials: int | None = None) -> Menu:
    left = expand_lottery(float(record["Ha"]), float(record["pHa"]), float(record["La"]),
                          record["LotShapeA"], int(float(record["LotNumA"])))
    right = expand_lottery(float(record["Hb"]), float(record["pHb"]), float(record["Lb"]),
                           record["LotShapeB"], int(float(record["LotNumB"])))
    return Menu(menu_id, left, right, rate, n_trials)


class Choices13kLoader(DatasetLoader):
    """Problem-level rates. Ambiguous problems are dropped and only feedback problems are kept."""
    schema = CHOICES13K

    def load(self, path: str | Path) -> Dataset:
        frame = read_table(path, self.delimiter)
        require_columns(frame, CHOICES13K_COLUMNS, str(path))
        kept = frame[~_flag(frame["Amb"]) & _flag(frame["Feedback"])]
        LOG.info(f"choices13k: kept {len(kept)} of {len(frame)} problems (unambiguous, with feedback)")

        menus, seen = [], set()
        for row, record in zip(kept.index + 1, kept.to_dict("records")):
            menu_id = str(record["Problem"]).strip()
            if menu_id in seen:
                raise SchemaViolation(f"problem {menu_id} appears more than once after filtering")
            seen.add(menu_id)
            menus.append(parse_row(int(row), lambda: menu_from_record(
                menu_id, record, 1.0 - float(record["bRate"]), int(float(record["n"])))))
        if not menus:
            raise EmptyDataset(f"{path}: no problems left after filtering")
        provenance = {"source": str(path), "schema": self.schema, "rows_read": len(frame), "rows_kept": len(kept)}
        return Dataset.build(Path(path).stem, menus, provenance)


class Cpc18Loader(DatasetLoader):
    """Trial-level records. Risk problems only; trials are aggregated to menus and also kept individually."""
    schema = CPC18

    def load(self, path: str | Path) -> Dataset:
        frame = read_table(path, self.delimiter)
        require_columns(frame, CPC18_COLUMNS, str(path))
        kept = frame[~_flag(frame["Amb"])]
        try:
            chose_left = 1 - kept["B"].astype(float).astype(np.int64).to_numpy()
        except ValueError as e:
            raise ParseError(f"column B: {e}") from e

        menus, index = [], np.empty(len(kept), dtype=np.int64)
        game_ids = kept["GameID"].astype(str).str.strip().to_numpy()
        for position, (game_id, rows) in enumerate(pd.Series(range(len(kept))).groupby(game_ids, sort=True)):
            rows = rows.to_numpy()
            index[rows] = position
            record = kept.iloc[rows[0]].to_dict()
            menus.append(parse_row(int(kept.index[rows[0]]) + 1, lambda: menu_from_record(
                str(game_id), record, float(chose_left[rows].mean()), len(rows))))
        if not menus:
            raise EmptyDataset(f"{path}: no risk problems found")
        LOG.info(f"cpc18: {len(menus)} menus, {len(kept)} trials")
        provenance = {"source": str(path), "schema": self.schema, "rows_read": len(frame), "rows_kept": len(kept)}
        return Dataset.build(Path(path).stem, menus, provenance, TrialSet(index, chose_left.astype(np.int64)))
