from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from rrmtools.common.ext.typing_ext import FloatArray
from rrmtools.errors import LengthMismatch, NegativeProbability, ProbabilityNotNormalized, ValidationError, ZeroMass

SUM_TOLERANCE = 1e-6
_RENORMALIZE_TOLERANCE = 1e-12
_MODE_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Lottery:
    """
    Finite-support distribution over monetary payoffs. Build instances through `canonicalize`,
    which guarantees strictly increasing outcomes and strictly positive probabilities.
    """
    outcomes: tuple[float, ...]
    probs: tuple[float, ...]

    @cached_property
    def xs(self) -> FloatArray:
        return np.asarray(self.outcomes, dtype=np.float64)

    @cached_property
    def ps(self) -> FloatArray:
        return np.asarray(self.probs, dtype=np.float64)

    @property
    def support_size(self) -> int:
        return len(self.outcomes)

    @property
    def min(self) -> float:
        return self.outcomes[0]

    @property
    def max(self) -> float:
        return self.outcomes[-1]

    def expected_value(self) -> float:
        return float(self.xs @ self.ps)

    def variance(self) -> float:
        mu = self.expected_value()
        return float(((self.xs - mu) ** 2) @ self.ps)

    def std(self) -> float:
        return float(np.sqrt(max(self.variance(), 0.0)))

    def skewness(self) -> float:
        sd = self.std()
        if sd < 1e-15:
            return 0.0
        mu = self.expected_value()
        return float((((self.xs - mu) / sd) ** 3) @ self.ps)

    def scaled(self, factor: float) -> 'Lottery':
        return Lottery(tuple(float(x) / factor for x in self.outcomes), self.probs)

    @staticmethod
    def degenerate(payoff: float) -> 'Lottery':
        return Lottery((float(payoff),), (1.0,))


def canonicalize(outcomes: Sequence[float], probs: Sequence[float]) -> Lottery:
    """
    Normal form of a lottery: equal payoffs merged, zero-probability payoffs dropped,
    outcomes sorted ascending and probabilities renormalized to sum to one.
    """
    if len(outcomes) != len(probs):
        raise LengthMismatch(f"outcomes and probs differ in length: {len(outcomes)} != {len(probs)}")
    if len(outcomes) == 0:
        raise LengthMismatch("a lottery needs at least one outcome")

    xs = np.asarray(outcomes, dtype=np.float64)
    ps = np.asarray(probs, dtype=np.float64)
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ps))):
        raise ValidationError("lottery outcomes and probabilities must be finite")
    if np.any(ps < 0):
        raise NegativeProbability(f"negative probability in {ps.tolist()}")

    total = ps.sum()
    if total <= 0:
        raise ZeroMass("all probabilities are zero")
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ProbabilityNotNormalized(f"probabilities sum to {total!r}")

    support, inverse = np.unique(xs, return_inverse=True)
    merged = np.bincount(inverse, weights=ps, minlength=len(support))
    keep = merged > 0
    support, merged = support[keep], merged[keep]

    total = merged.sum()
    if abs(total - 1.0) > _RENORMALIZE_TOLERANCE:
        merged = merged / total

    return Lottery(tuple(support.tolist()), tuple(merged.tolist()))


def mode(lottery: Lottery) -> float:
    """Most likely payoff, ties broken upward."""
    ps = lottery.ps
    tied = np.flatnonzero(ps >= ps.max() - _MODE_TIE_TOLERANCE)
    return lottery.outcomes[int(tied[-1])]


@dataclass(frozen=True)
class Menu:
    id: str
    left: Lottery
    right: Lottery
    choice_rate: Optional[float] = None
    n_trials: Optional[int] = None

    def __post_init__(self):
        if self.choice_rate is not None and not (0.0 <= self.choice_rate <= 1.0):
            raise ValidationError(f"menu {self.id}: choice rate {self.choice_rate} outside [0, 1]")
        if self.n_trials is not None and self.n_trials < 1:
            raise ValidationError(f"menu {self.id}: n_trials must be >= 1, got {self.n_trials}")

    def max_abs_payoff(self) -> float:
        return max(abs(self.left.min), abs(self.left.max), abs(self.right.min), abs(self.right.max))

    def support_count(self) -> int:
        return self.left.support_size + self.right.support_size

    def swapped(self) -> 'Menu':
        rate = None if self.choice_rate is None else 1.0 - self.choice_rate
        return Menu(self.id, self.right, self.left, rate, self.n_trials)
