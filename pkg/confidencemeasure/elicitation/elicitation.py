from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import numpy.typing as npt

from confidencemeasure.collections.validators import Number
from confidencemeasure.combination.combination import de_cdf, de_quantile
from confidencemeasure.core.core import (
    DEFAULT_GRID_POINTS,
    TAIL_PROBABILITY,
    ParameterGrid,
    Provenance,
    SignificanceCurve,
    SourceKind,
)
from confidencemeasure.logging.exceptions import (
    DomainException,
    ElicitationInconsistencyException,
    InsufficientDataException,
    InvalidInputException,
)
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.models.models import SampleSummary, sf_normal_known_sigma, sf_student_t

TAIL_NODES: int = 200
DEFAULT_RESOLUTION: float = 1e-3


class TailCompletion(str, Enum):
    EXPONENTIAL = "exponential"
    NONE = "none"


class HypotheticalKind(str, Enum):
    KNOWN_SIGMA = "known_sigma"
    STUDENT_T = "student_t"


@dataclass(frozen=True)
class ElicitedPoints:
    """
    Lower-tailed p-values (theta, p) given by an agent, sorted by theta.
    Both theta and p must be strictly increasing and p must lie in (0, 1).
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        cleaned = tuple((float(theta), float(p)) for theta, p in self.points)
        for theta, p in cleaned:
            if not np.isfinite(theta):
                raise InvalidInputException("points", f"theta must be finite, got {theta!r}")
            if not 0.0 < p < 1.0:
                raise DomainException("p", p, "(0, 1)")
        for first, second in zip(cleaned, cleaned[1:]):
            if not first[0] < second[0]:
                raise ElicitationInconsistencyException(first, second, "theta must be strictly increasing")
            if not first[1] < second[1]:
                raise ElicitationInconsistencyException(first, second, "p must increase with theta")
        object.__setattr__(self, "points", cleaned)

    @classmethod
    def from_arrays(cls, thetas: npt.ArrayLike, probabilities: npt.ArrayLike) -> "ElicitedPoints":
        thetas = np.asarray(thetas, dtype=np.float64).ravel()
        probabilities = np.asarray(probabilities, dtype=np.float64).ravel()
        if thetas.shape != probabilities.shape:
            raise InvalidInputException("points", "theta and p must have the same length")
        return cls(tuple(zip(thetas.tolist(), probabilities.tolist())))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def thetas(self) -> npt.NDArray[np.float64]:
        return np.array([theta for theta, _ in self.points], dtype=np.float64)

    @property
    def probabilities(self) -> npt.NDArray[np.float64]:
        return np.array([p for _, p in self.points], dtype=np.float64)


@dataclass(frozen=True)
class ElicitedIntervals:
    """
    Central intervals (level, lo, hi) given by an agent. Intervals of higher
    level must strictly contain those of lower level.
    """

    entries: tuple[tuple[float, float, float], ...]

    def __post_init__(self) -> None:
        cleaned = tuple(sorted((float(level), float(lo), float(hi)) for level, lo, hi in self.entries))
        if not cleaned:
            raise InsufficientDataException("at least one elicited interval is required")
        for level, lo, hi in cleaned:
            if not 0.0 < level < 1.0:
                raise DomainException("level", level, "(0, 1)")
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidInputException("entries", f"interval ({lo}, {hi}) must be finite with lo < hi")
        for inner, outer in zip(cleaned, cleaned[1:]):
            if inner[0] == outer[0]:
                raise ElicitationInconsistencyException(inner, outer, "levels must be distinct")
            if not (outer[1] < inner[1] and inner[2] < outer[2]):
                raise ElicitationInconsistencyException(inner, outer, "higher levels must contain lower ones")
        object.__setattr__(self, "entries", cleaned)

    def to_points(self, median: float) -> ElicitedPoints:
        """
        Central-interval convention: (lo, (1 - level) / 2), (median, 1/2), (hi, 1 - (1 - level) / 2).
        """
        innermost = self.entries[0]
        if not innermost[1] < median < innermost[2]:
            raise ElicitationInconsistencyException(
                ("median", median), innermost, "the median must lie inside every interval"
            )
        points = [(median, 0.5)]
        for level, lo, hi in self.entries:
            alpha = (1.0 - level) / 2.0
            points.append((lo, alpha))
            points.append((hi, 1.0 - alpha))
        return ElicitedPoints(tuple(sorted(points)))


class AgentNoiseSpec:
    """
    Shared additive recall error Y(a) ~ N(0, noise_sd^2) added to every
    observation the agent bases its opinion on.
    """

    noise_sd = Number(min_value=0)

    def __init__(self, noise_sd: float = 0.0) -> None:
        self.noise_sd = noise_sd

    def __repr__(self) -> str:
        return f"AgentNoiseSpec(noise_sd={self.noise_sd})"


@dataclass(frozen=True)
class HypotheticalModel:
    """
    Sampling model of the data an agent might have based its opinion on.
    `sigma` is the known population sd of the KNOWN_SIGMA route.
    """

    kind: HypotheticalKind = HypotheticalKind.KNOWN_SIGMA
    sigma: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", HypotheticalKind(self.kind))


def _tail_nodes(theta: float, pivot: float, slope: float, target: float) -> list[tuple[float, float]]:
    # nodes evenly spaced in the Laplace pivot, linear in theta, excluding the anchor
    pivots = np.linspace(target, pivot, TAIL_NODES + 1)[:-1]
    thetas = theta + (pivots - pivot) / slope
    return list(zip(thetas.tolist(), np.asarray(de_cdf(pivots)).tolist()))


def complete_tails(points: ElicitedPoints) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Extends elicited points beyond their range with tails that are linear in
    the Laplace pivot DE^-1(p), continuing the slope of the two outermost
    points on each side, until p reaches TAIL_PROBABILITY (resp. 1 - TAIL_PROBABILITY).
    """
    thetas = points.thetas
    pivots = np.asarray(de_quantile(points.probabilities))
    low_target = float(de_quantile(TAIL_PROBABILITY))
    high_target = float(de_quantile(1.0 - TAIL_PROBABILITY))

    left: list[tuple[float, float]] = []
    if pivots[0] > low_target:
        slope = (pivots[1] - pivots[0]) / (thetas[1] - thetas[0])
        left = _tail_nodes(float(thetas[0]), float(pivots[0]), float(slope), low_target)

    right: list[tuple[float, float]] = []
    if pivots[-1] < high_target:
        slope = (pivots[-1] - pivots[-2]) / (thetas[-1] - thetas[-2])
        right = _tail_nodes(float(thetas[-1]), float(pivots[-1]), float(slope), high_target)[::-1]

    nodes = [*left, *points.points, *right]
    return np.array([theta for theta, _ in nodes]), np.array([p for _, p in nodes])


def sf_from_elicited_pvalues(
    points: ElicitedPoints,
    tail_completion: TailCompletion = TailCompletion.EXPONENTIAL,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Monotone piecewise-linear curve through elicited lower-tailed p-values.
    The curve passes exactly through every elicited point.

    Raises:
        InsufficientDataException: fewer than 2 points.
        InvalidInputException: TailCompletion.NONE and the points do not reach the tails.
    """
    if len(points) < 2:
        raise InsufficientDataException(f"at least 2 elicited points are required, got {len(points)}")

    if TailCompletion(tail_completion) is TailCompletion.EXPONENTIAL:
        thetas, values = complete_tails(points)
    else:
        thetas, values = points.thetas, points.probabilities

    return SignificanceCurve(
        grid=ParameterGrid(thetas),
        cdf_values=values,
        provenance=provenance if provenance is not None else Provenance("elicited_pvalues", SourceKind.SUBJECTIVE),
    )


def sf_from_elicited_intervals(
    entries: ElicitedIntervals,
    median: float,
    tail_completion: TailCompletion = TailCompletion.EXPONENTIAL,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Curve through the endpoints of elicited central intervals and the median.

    Example: median 0 with the 90% interval (-1.645, 1.645) gives the nodes
    (-1.645, 0.05), (0, 0.5) and (1.645, 0.95).
    """
    return sf_from_elicited_pvalues(
        entries.to_points(median),
        tail_completion,
        provenance if provenance is not None else Provenance("elicited_intervals", SourceKind.SUBJECTIVE),
    )


def sf_from_hypothetical_data(
    model: HypotheticalModel,
    hypothetical_sample: Sequence[float],
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Subjective curve derived from the data an agent might have based its
    opinion on, e.g. a single reading of 740 from N(theta, 25^2). `grid`
    replaces the default grid around the sample mean.

    Raises:
        DomainException: the sample does not fit the model.
    """
    provenance = provenance if provenance is not None else Provenance("hypothetical_data", SourceKind.SUBJECTIVE)
    sample = np.asarray(hypothetical_sample, dtype=np.float64).ravel()

    if model.kind is HypotheticalKind.KNOWN_SIGMA:
        if model.sigma is None:
            raise DomainException("sigma", None, "(0, inf), required by the known_sigma model")
        if sample.size < 1:
            raise DomainException("hypothetical_sample", sample.tolist(), "samples of at least 1 value")
        summary = SampleSummary.from_sample(sample)
        return sf_normal_known_sigma(summary, model.sigma, grid=grid, points=points, provenance=provenance)

    if model.sigma is not None:
        raise DomainException("sigma", model.sigma, "None, the student_t model estimates it")
    if sample.size < 2:
        raise DomainException("hypothetical_sample", sample.tolist(), "samples of at least 2 values")
    return sf_student_t(sample, grid=grid, points=points, provenance=provenance)


def sf_from_bayes_posterior(
    posterior_nodes: ElicitedPoints,
    matching_declared: bool,
    tail_completion: TailCompletion = TailCompletion.EXPONENTIAL,
    source_id: str = "posterior",
) -> SignificanceCurve:
    """
    Wraps a posterior CDF as a significance curve. A posterior from a
    probability-matching prior is a confidence measure; otherwise the curve is
    flagged approximate and its values are left unchanged.
    """
    if not matching_declared:
        LOGGER.warning(f"[elicitation] posterior `{source_id}` has no declared matching prior, flagged approximate")
    provenance = Provenance(source_id, SourceKind.SUBJECTIVE, approximate=not matching_declared)
    return sf_from_elicited_pvalues(posterior_nodes, tail_completion, provenance)


def finite_difference_density(curve: SignificanceCurve) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Returns the grid nodes and the central finite difference density of the
    curve at each node.
    """
    return curve.grid.nodes, np.gradient(curve.cdf_values, curve.grid.nodes)


def density_mode(curve: SignificanceCurve, resolution: float = DEFAULT_RESOLUTION) -> float:
    """
    Mode of the density of a curve.

    The peak of the node-wise finite difference density is bracketed by its
    neighbouring nodes, the bracket is refined to a spacing of at most
    `resolution` and the density is re-evaluated there by central differences
    with a step of one grid cell.
    """
    if not resolution > 0.0:
        raise DomainException("resolution", resolution, "(0, inf)")

    nodes, density = finite_difference_density(curve)
    peak = int(np.argmax(density))
    lo = max(peak - 1, 0)
    hi = min(peak + 1, nodes.size - 1)

    step = float(np.max(np.diff(nodes[lo : hi + 1])))
    count = max(int(np.ceil((nodes[hi] - nodes[lo]) / resolution)) + 1, 3)
    fine = np.linspace(nodes[lo], nodes[hi], count)
    fine_density = (curve.cdf_at(fine + step) - curve.cdf_at(fine - step)) / (2.0 * step)
    return float(fine[int(np.argmax(fine_density))])
