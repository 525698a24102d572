from typing import Optional


class RRMError(Exception):
    """Root of every error raised by rrmtools."""


class ValidationError(RRMError, ValueError):
    """Input violates a documented precondition. Maps to CLI exit code 2."""


class NumericalError(RRMError, ArithmeticError):
    pass


class LengthMismatch(ValidationError):
    pass


class NegativeProbability(ValidationError):
    pass


class ZeroMass(ValidationError):
    pass


class ProbabilityNotNormalized(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class MissingChoiceRate(ValidationError):
    pass


class MissingTrials(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class TooFewMenus(ValidationError):
    pass


class StrataTooFine(ValidationError):
    pass


class NotSimplex(ValidationError):
    pass


class SchemaViolation(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class RankDeficientDesign(ValidationError):
    pass


class DegenerateDenominator(ValidationError):
    pass


class NoTwoSidedMenus(ValidationError):
    pass


class FactorMismatch(ValidationError):
    pass


class InfeasibleCell(ValidationError):
    def __init__(self, message: str, achieved_rank: int, needed_rank: int):
        self.achieved_rank = achieved_rank
        self.needed_rank = needed_rank
        super().__init__(f"{message} (achieved rank {achieved_rank}, needed {needed_rank})")


class ConfigError(ValidationError):
    pass


class NonFiniteLoss(NumericalError):
    pass


class SingularVariance(NumericalError):
    pass
