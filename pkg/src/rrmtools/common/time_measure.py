import time
from contextlib import ContextDecorator
from enum import Enum
from typing import Optional

from globalog import LOG

from rrmtools.common.ext.typing_ext import LoggerType


class TimeUnit(Enum):
    MILLISECONDS = 1e3
    SECONDS = 1


class DurationMeasure(ContextDecorator):
    """
    Measures the duration of a block and logs it.

    Args:
        action: description of the measured stage
        logger: logger to use, defaults to the global LOG
        log_start: whether to log when the stage starts
        log_level: name of the logger method used for start/end lines ('info', 'debug', ...)
        unit: unit used in the completion line

    Example:
        >>> with DurationMeasure(action='building rule matrix', unit=TimeUnit.SECONDS):
        ...     pass
    """

    def __init__(
            self,
            action: str,
            logger: Optional[LoggerType] = None,
            log_start: bool = False,
            log_level: str = 'info',
            unit: TimeUnit = TimeUnit.MILLISECONDS,
    ):
        self.action = action
        self.log_start = log_start
        self.unit = unit
        self.start_time = 0.0
        self.duration = 0.0
        self._logger = logger or LOG
        self._log = getattr(self._logger, log_level)

    def _suffix(self) -> str:
        return "ms" if self.unit == TimeUnit.MILLISECONDS else "s"

    def __enter__(self):
        self.start_time = time.perf_counter()
        if self.log_start:
            self._log(f"Starting: {self.action}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = (time.perf_counter() - self.start_time) * self.unit.value
        if exc_type is not None:
            self._logger.error(f"Failed: {self.action} (duration: {self.duration:.2f}{self._suffix()})",
                               exc_info=exc_val)
            return False

        self._log(f"Completed: {self.action} (duration: {self.duration:.2f}{self._suffix()})")
        return False
