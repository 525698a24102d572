import csv
from datetime import datetime
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional, Union

from globalog import LOG

from rrmtools.common.json_io import write_json

REPORTS_ROOT = Path.home() / '.rrmtools' / 'reports'


class Reporter:
    _instance = None

    def __init__(self):
        self._enabled = False
        self._base_path: Optional[Path] = None

    @classmethod
    def get_instance(cls) -> 'Reporter':
        if cls._instance is None:
            cls._instance = Reporter()
        return cls._instance

    def initialize(self, folder: Optional[Path] = None, name: str = 'run') -> None:
        """Enable reporting into `folder`, or into ~/.rrmtools/reports/<name>/<timestamp> when none is given."""
        self._enabled = True

        if folder is not None:
            self._base_path = Path(folder).expanduser()
        else:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self._base_path = REPORTS_ROOT / name / timestamp

        self._base_path.mkdir(parents=True, exist_ok=True)
        LOG.info(f"Writing reports to {self._base_path}")

    def disable(self) -> None:
        self._enabled = False
        self._base_path = None

    @property
    def base_path(self) -> Optional[Path]:
        return self._base_path

    @property
    def is_enabled(self) -> bool:
        return self._enabled


class ReportWriter:
    def __init__(self, filepath: Path):
        self.filepath = filepath
        self.filepath.parent.mkdir(parents=True, exist_ok=True)

    def write_json(self, data: Any) -> Path:
        """Write data as JSON; numpy scalars and arrays are converted."""
        path = self.filepath.with_suffix('.json')
        write_json(data, path)
        return path

    def write_csv(self, data: list, headers: Optional[list] = None) -> Path:
        """Write rows as CSV."""
        path = self.filepath.with_suffix('.csv')
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            if headers:
                writer.writerow(headers)
            writer.writerows(data)
        return path

    def write_plain_text(self, text: str) -> Path:
        with open(self.filepath, 'w') as f:
            f.write(text)
        return self.filepath


def init_report(folder: Optional[Path] = None, name: str = 'run') -> None:
    """Initialize the global reporter."""
    Reporter.get_instance().initialize(folder, name)


def report(filename: Union[str, Path]) -> Callable:
    """
    Decorator that handles report generation.
    The decorated function receives a ReportWriter for `filename` as its first argument and is
    skipped entirely while reporting is disabled.
    """

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> Any:
            reporter = Reporter.get_instance()
            if reporter.is_enabled and reporter.base_path:
                writer = ReportWriter(reporter.base_path / filename)
                return func(writer, *args, **kwargs)
            return None

        return wrapper

    return decorator
