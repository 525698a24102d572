import numpy as np
import pytest

from rrmtools.data_manage.synthetic import GeneratorConfig, draw_params, generate_synthetic
from rrmtools.lottery import Lottery, Menu, canonicalize
from rrmtools.reporting import Reporter
from rrmtools.rules import RuleId

SMALL_LIBRARY = (RuleId.MMn, RuleId.MMx, RuleId.A1, RuleId.A2)


def lottery(*pairs: tuple[float, float]) -> Lottery:
    """lottery((0, 0.5), (10, 0.5)) -> canonical lottery over payoffs 0 and 10."""
    return canonicalize([x for x, _ in pairs], [p for _, p in pairs])


def sure(x: float) -> Lottery:
    return Lottery.degenerate(x)


def random_lottery(rng: np.random.Generator, max_support: int = 4, low: int = -5, high: int = 5) -> Lottery:
    size = int(rng.integers(1, max_support + 1))
    payoffs = rng.choice(np.arange(low, high + 1), size=size, replace=False).astype(np.float64)
    return canonicalize(payoffs, rng.dirichlet(np.ones(size)))


def random_menus(rng: np.random.Generator, n: int, **kwargs) -> list[Menu]:
    return [Menu(f"m{i}", random_lottery(rng, **kwargs), random_lottery(rng, **kwargs)) for i in range(n)]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def small_menus() -> list[Menu]:
    return [
        Menu("m1", lottery((0, 0.5), (10, 0.5)), sure(1), choice_rate=0.64, n_trials=25),
        Menu("m2", lottery((1, 0.5), (2, 0.5)), sure(1.5), choice_rate=0.40, n_trials=25),
        Menu("m3", sure(1), sure(0), choice_rate=0.92, n_trials=25),
        Menu("m4", lottery((-2, 0.2), (6, 0.8)), lottery((0, 0.5), (4, 0.5)), choice_rate=0.55, n_trials=25),
        Menu("m5", lottery((3, 0.9), (-10, 0.1)), sure(2), choice_rate=0.47, n_trials=25),
        Menu("m6", lottery((0, 0.3), (5, 0.3), (9, 0.4)), lottery((2, 0.6), (7, 0.4)), choice_rate=0.51, n_trials=25),
    ]


@pytest.fixture(scope="session")
def oracle_params():
    return draw_params(SMALL_LIBRARY, ("z_1", "z_2"), alpha_scale=0.5, beta_scale=0.5, seed=3)


@pytest.fixture(scope="session")
def noiseless_dataset(oracle_params):
    config = GeneratorConfig(n_cells=6, menus_per_cell=12, max_support=3, noiseless=True, with_trials=True)
    return generate_synthetic(oracle_params, config, n_trials=50, seed=11, name="noiseless")


@pytest.fixture(scope="session")
def noisy_dataset(oracle_params):
    config = GeneratorConfig(n_cells=6, menus_per_cell=12, max_support=3, require_rank=False, with_trials=True)
    return generate_synthetic(oracle_params, config, n_trials=40, seed=5, name="noisy")


@pytest.fixture(autouse=True)
def reporter_off():
    yield
    Reporter.get_instance().disable()
