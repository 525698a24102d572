from dataclasses import dataclass

from rrmtools.errors import DegenerateDenominator

# Published out-of-sample scores of the expected-utility baseline and the flexible benchmark on
# choices13k. They are inputs: neither model is fitted here.
PUBLISHED_BASELINE_MSE = 0.02215
PUBLISHED_FLEXIBLE_MSE = 0.01139


@dataclass(frozen=True)
class BenchmarkScores:
    baseline_mse: float = PUBLISHED_BASELINE_MSE
    flexible_mse: float = PUBLISHED_FLEXIBLE_MSE
    baseline_name: str = "expected-utility"
    flexible_name: str = "flexible"


def completeness(model_mse: float, bench: BenchmarkScores = BenchmarkScores()) -> float:
    """Share of the baseline-to-flexible MSE gap the model closes (0 at the baseline, 1 at the benchmark)."""
    gap = bench.baseline_mse - bench.flexible_mse
    if not gap > 0:
        raise DegenerateDenominator(
            f"baseline MSE {bench.baseline_mse} must exceed flexible MSE {bench.flexible_mse}")
    return (bench.baseline_mse - model_mse) / gap
