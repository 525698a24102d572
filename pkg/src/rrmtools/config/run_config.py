import dataclasses
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from globalog import LOG

from rrmtools.common.json_io import read_json
from rrmtools.data_manage.synthetic import GeneratorConfig
from rrmtools.diagnostics.completeness import BenchmarkScores
from rrmtools.errors import ConfigError
from rrmtools.estimation.two_step import BootstrapConfig, TwoStepConfig
from rrmtools.evaluation.splits import SplitPlan
from rrmtools.gate.training import TrainConfig

RUN_CONFIG_VERSION = 1
CONFIG_FILE_NAME = 'rrm.json'
CONFIG_FOLDER_ENV = 'RRM_CONFIG_FOLDER'

_DEFAULT_CONFIG_PATH = Path(__file__).parent / CONFIG_FILE_NAME


def locate_config_file() -> Optional[Path]:
    env_var = os.environ.get(CONFIG_FOLDER_ENV)

    if env_var:
        return Path(env_var) / CONFIG_FILE_NAME

    cwd = Path.cwd()
    config_file = cwd / CONFIG_FILE_NAME

    if config_file.exists():
        return config_file

    config_file_in_folder = cwd / 'rrm' / CONFIG_FILE_NAME

    if config_file_in_folder.exists():
        return config_file_in_folder

    LOG.warning(f'Could not locate {CONFIG_FILE_NAME}, using defaults')
    return None


def _section(cls, data: Optional[dict[str, Any]], name: str):
    """Builds a config dataclass from a JSON object, rejecting keys the class does not define."""
    data = dict(data or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {unknown}")
    for key, value in data.items():
        if isinstance(value, list):
            data[key] = tuple(value)
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{name}' section: {e}") from e


@dataclass(frozen=True)
class RunConfig:
    version: int = RUN_CONFIG_VERSION
    seed: int = 0
    threads: int = 1
    epsilon: float = 0.0
    encoding: str = "gate"
    exclude: tuple[str, ...] = ()
    train: TrainConfig = field(default_factory=TrainConfig)
    splits: SplitPlan = field(default_factory=SplitPlan)
    two_step: TwoStepConfig = field(default_factory=TwoStepConfig)
    bench: BenchmarkScores = field(default_factory=BenchmarkScores)
    synthetic: GeneratorConfig = field(default_factory=GeneratorConfig)
    k_bins: int = 10
    permutations: int = 10
    topk: tuple[int, ...] = (3, 5, 7, 12)
    family_topk: tuple[int, ...] = ()
    placebo_strata: int = 10
    curve_fractions: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    activity_epsilons: tuple[float, ...] = (0.0, 0.01, 0.05, 0.1)

    @staticmethod
    def from_dict(config_data: dict[str, Any]) -> 'RunConfig':
        version = config_data.get("version", RUN_CONFIG_VERSION)
        if version != RUN_CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}, expected {RUN_CONFIG_VERSION}")
        sections = {"train", "splits", "two_step", "bench", "synthetic"}
        top = {key: value for key, value in config_data.items() if key not in sections}
        two_step = dict(config_data.get("two_step") or {})
        bootstrap = two_step.pop("bootstrap", {})
        two_step["bootstrap"] = None if bootstrap is None else _section(BootstrapConfig, bootstrap, "two_step.bootstrap")
        config = _section(RunConfig, top, "config")
        config = replace(
            config,
            train=_section(TrainConfig, config_data.get("train"), "train"),
            splits=_section(SplitPlan, config_data.get("splits"), "splits"),
            two_step=_section(TwoStepConfig, two_step, "two_step"),
            bench=_section(BenchmarkScores, config_data.get("bench"), "bench"),
            synthetic=_section(GeneratorConfig, config_data.get("synthetic"), "synthetic"),
        )
        return config.with_overrides(seed=top.get("seed"), threads=top.get("threads"))

    @staticmethod
    def from_path(path: str | Path) -> 'RunConfig':
        try:
            config_data = read_json(path)
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        LOG.info(f"Loaded run config from {path}")
        return RunConfig.from_dict(config_data)

    @staticmethod
    def default() -> 'RunConfig':
        return RunConfig.from_path(_DEFAULT_CONFIG_PATH)

    @staticmethod
    def resolve(path: Optional[str | Path] = None) -> 'RunConfig':
        """Explicit path, else the located rrm.json, else the packaged defaults."""
        path = path or locate_config_file()
        return RunConfig.default() if path is None else RunConfig.from_path(path)

    def with_overrides(self, seed: Optional[int] = None, threads: Optional[int] = None) -> 'RunConfig':
        """Applies the global seed and thread count to every section that carries one."""
        config = self
        if seed is not None:
            two_step = replace(self.two_step, seed=seed,
                               bootstrap=None if self.two_step.bootstrap is None
                               else replace(self.two_step.bootstrap, seed=seed))
            config = replace(config, seed=seed, train=replace(self.train, seed=seed),
                             splits=replace(self.splits, seed=seed), two_step=two_step)
        if threads is not None:
            config = replace(config, threads=threads, two_step=replace(config.two_step, threads=threads))
        return config

    def snapshot(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
