from collections.abc import Sequence
from typing import Any


class ConfidenceMeasureException(Exception):
    """Base class of every error raised by confidencemeasure."""


class InvalidInputException(ConfidenceMeasureException, ValueError):
    """Invalid Input Exception

    Attributes
    ----------
    field (str): Name of the offending input
    reason (str): Why the input was rejected

    """

    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid input for `{field}`: {reason}")


class DomainException(ConfidenceMeasureException, ValueError):
    """Domain Exception

    Attributes
    ----------
    name (str): Name of the argument
    value (Any): Rejected value
    domain (str): Human readable description of the accepted domain

    """

    def __init__(self, name: str, value: Any, domain: str) -> None:
        self.name = name
        self.value = value
        self.domain = domain
        super().__init__(f"{name}={value!r} is outside the domain {domain}")


class InsufficientDataException(ConfidenceMeasureException, ValueError):
    """Insufficient Data Exception

    Attributes
    ----------
    reason (str): What is missing from the data

    """

    def __init__(self, reason: str) -> None:
        self.reason = reason
        super().__init__(f"Insufficient data: {reason}")


class IncompatibleSourcesException(ConfidenceMeasureException, ValueError):
    """Incompatible Sources Exception

    Attributes
    ----------
    spans (list[tuple[float, float]]): Parameter spans of the sources that could not be combined
    reason (str): Why the spans are incompatible

    """

    def __init__(self, spans: Sequence[tuple[float, float]], reason: str = "parameter spans do not overlap") -> None:
        self.spans = list(spans)
        self.reason = reason
        rendered = ", ".join(f"[{lo:g}, {hi:g}]" for lo, hi in self.spans)
        super().__init__(f"Incompatible sources ({reason}): {rendered}")


class ElicitationInconsistencyException(ConfidenceMeasureException, ValueError):
    """Elicitation Inconsistency Exception

    Attributes
    ----------
    first (Any): First member of the violating pair
    second (Any): Second member of the violating pair
    reason (str): Which ordering is violated

    """

    def __init__(self, first: Any, second: Any, reason: str) -> None:
        self.first = first
        self.second = second
        self.reason = reason
        super().__init__(f"Inconsistent elicitation between {first} and {second}: {reason}")


class TailExtrapolationException(ConfidenceMeasureException):
    """Tail Extrapolation Exception

    Attributes
    ----------
    probability (float): Requested probability
    achievable (tuple[float, float]): Probability range represented by the curve

    """

    def __init__(self, probability: float, achievable: tuple[float, float]) -> None:
        self.probability = probability
        self.achievable = achievable
        super().__init__(
            f"Probability {probability!r} lies outside the represented range "
            f"[{achievable[0]!r}, {achievable[1]!r}]; widen the parameter grid instead of extrapolating."
        )


class InfiniteOddsException(ConfidenceMeasureException):
    """Infinite Odds Exception

    Attributes
    ----------
    coverage (float): Estimated coverage, exactly 0 or 1
    bound (float): One-sided 95% bound on the odds
    direction (str): "lower" if the odds are at least `bound`, "upper" if at most

    """

    def __init__(self, coverage: float, bound: float, direction: str) -> None:
        self.coverage = coverage
        self.bound = bound
        self.direction = direction
        relation = ">=" if direction == "lower" else "<="
        super().__init__(f"Coverage estimate {coverage!r} gives degenerate odds; odds {relation} {bound!r}")


VALIDATION_EXCEPTIONS: tuple[type[Exception], ...] = (
    InvalidInputException,
    DomainException,
    InsufficientDataException,
    IncompatibleSourcesException,
    ElicitationInconsistencyException,
)

NUMERICAL_EXCEPTIONS: tuple[type[Exception], ...] = (
    TailExtrapolationException,
    InfiniteOddsException,
)
