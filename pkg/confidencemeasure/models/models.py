import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np
import numpy.typing as npt

from confidencemeasure.collections.validators import Integer, Number
from confidencemeasure.core.core import (
    DEFAULT_GRID_POINTS,
    TAIL_PROBABILITY,
    ParameterGrid,
    Provenance,
    SignificanceCurve,
    SourceKind,
    curve_from_values,
)
from confidencemeasure.logging.exceptions import (
    DomainException,
    InsufficientDataException,
    InvalidInputException,
)
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.math.math import (
    normal_cdf,
    normal_quantile,
    student_t_cdf,
    student_t_quantile,
)


class Family(str, Enum):
    NORMAL = "normal"
    STUDENT_T = "student_t"


@dataclass(frozen=True)
class SampleSummary:
    """
    Sufficient summary of a normal sample.

    Args:
        n (int): Number of observations.
        mean (float): Sample mean.
        sd (float): Sample standard deviation with divisor n - 1, 0 when n = 1.
    """

    n: int
    mean: float
    sd: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainException("n", self.n, "integers >= 1")
        if not math.isfinite(self.mean):
            raise InvalidInputException("mean", f"expected a finite value, got {self.mean!r}")
        if not math.isfinite(self.sd) or self.sd < 0.0:
            raise DomainException("sd", self.sd, "[0, inf)")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "sd", float(self.sd))

    @classmethod
    def from_sample(cls, sample: Sequence[float]) -> "SampleSummary":
        values = np.asarray(sample, dtype=np.float64).ravel()
        if values.size < 1:
            raise InsufficientDataException("the sample is empty")
        if not np.all(np.isfinite(values)):
            raise InvalidInputException("sample", "all observations must be finite")
        sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return cls(n=int(values.size), mean=float(np.mean(values)), sd=sd)

    @property
    def standard_error(self) -> float:
        return self.sd / math.sqrt(self.n)


class NormalModelSpec:
    """
    Normal sampling model N(theta, gamma^2) with n observations per sample.

    Args:
        theta (float): True mean, the parameter of interest.
        gamma (float): Population standard deviation, strictly positive.
        n (int): Sample size, at least 1.
    """

    theta = Number()
    gamma = Number(min_value=0, exclusive_min=True)
    n = Integer(min_value=1)

    def __init__(self, theta: float, gamma: float, n: int) -> None:
        self.theta = theta
        self.gamma = gamma
        self.n = n

    def __repr__(self) -> str:
        return f"NormalModelSpec(theta={self.theta}, gamma={self.gamma}, n={self.n})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalModelSpec):
            return NotImplemented
        return (self.theta, self.gamma, self.n) == (other.theta, other.gamma, other.n)

    def __hash__(self) -> int:
        return hash((self.theta, self.gamma, self.n))

    @property
    def standard_error(self) -> float:
        return float(self.gamma / math.sqrt(self.n))


def _check_positive(name: str, value: float) -> float:
    if not math.isfinite(value) or value <= 0.0:
        raise DomainException(name, value, "(0, inf)")
    return float(value)


def _pivot_cdf(z: npt.NDArray[np.float64], family: Family, df: Optional[float]) -> npt.NDArray[np.float64]:
    if family is Family.NORMAL:
        return np.asarray(normal_cdf(z), dtype=np.float64)
    if df is None:
        raise InvalidInputException("df", "degrees of freedom are required for a Student-t pivot")
    return np.asarray(student_t_cdf(z, df), dtype=np.float64)


def _pivot_quantile(u: npt.NDArray[np.float64], family: Family, df: Optional[float]) -> npt.NDArray[np.float64]:
    if family is Family.NORMAL:
        return np.asarray(normal_quantile(u), dtype=np.float64)
    if df is None:
        raise InvalidInputException("df", "degrees of freedom are required for a Student-t pivot")
    return np.asarray(student_t_quantile(u, df), dtype=np.float64)


@lru_cache(maxsize=64)
def default_pivot_nodes(
    family: Family, df: Optional[float] = None, points: int = DEFAULT_GRID_POINTS
) -> npt.NDArray[np.float64]:
    """
    Standardised grid nodes Q(Phi(z)) for z evenly spaced between the normal
    quantiles of TAIL_PROBABILITY and 1 - TAIL_PROBABILITY, where Q is the
    quantile function of the pivot. The nodes span the central 1 - 2e-10 of
    the pivot distribution and stay dense around its centre even for heavy
    tails.
    """
    if points < 2:
        raise DomainException("points", points, "[2, inf)")
    bound = float(normal_quantile(1.0 - TAIL_PROBABILITY))
    z = np.linspace(-bound, bound, points)
    if family is Family.NORMAL:
        nodes = z
    else:
        nodes = _pivot_quantile(np.asarray(normal_cdf(z), dtype=np.float64), family, df)
    # symmetrise so that the pivot median sits exactly on a node
    nodes = 0.5 * (nodes - nodes[::-1])
    nodes.flags.writeable = False
    return nodes


def sf_location_scale(
    center: float,
    spread: float,
    family: Family = Family.NORMAL,
    df: Optional[float] = None,
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Significance curve F(theta) = Q_cdf((theta - center) / spread) of a
    location-scale pivot.

    Args:
        center (float): Location of the pivot, e.g. the sample mean.
        spread (float): Scale of the pivot, e.g. the standard error.
        family (Family): Pivot distribution. Defaults to Family.NORMAL.
        df (float): Degrees of freedom, required for Family.STUDENT_T.
        grid (ParameterGrid): Explicit grid. Defaults to the quantile-spaced grid of `default_pivot_nodes`.
        points (int): Number of nodes of the default grid. Defaults to 4001.
        provenance (Provenance): Defaults to an objective source.

    Raises:
        DomainException: spread or df not strictly positive.
        InvalidInputException: an explicit grid leaves more than TAIL_MASS in a tail.
    """
    family = Family(family)
    if not math.isfinite(center):
        raise InvalidInputException("center", f"expected a finite value, got {center!r}")
    spread = _check_positive("spread", spread)
    if family is Family.STUDENT_T:
        if df is None:
            raise InvalidInputException("df", "degrees of freedom are required for a Student-t pivot")
        df = _check_positive("df", df)

    if grid is None:
        grid = ParameterGrid(center + spread * default_pivot_nodes(family, df, points))

    values = _pivot_cdf((grid.nodes - center) / spread, family, df)
    LOGGER.debug(f"[models] {family.value} curve, center={center:g}, spread={spread:g}, {len(grid)} nodes")
    return curve_from_values(grid, values, provenance=provenance)


def sf_normal_known_sigma(
    summary: SampleSummary,
    sigma: float,
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    F_x(theta) = Phi((theta - mean) / (sigma / sqrt(n))) for a normal sample of known sd.
    """
    sigma = _check_positive("sigma", sigma)
    return sf_location_scale(
        summary.mean,
        sigma / math.sqrt(summary.n),
        Family.NORMAL,
        grid=grid,
        points=points,
        provenance=provenance if provenance is not None else Provenance("normal_sample", SourceKind.OBJECTIVE),
    )


def sf_student_t_summary(
    summary: SampleSummary,
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    F_x(theta) = T_{n-1}((theta - mean) / (sd / sqrt(n))).

    Raises:
        InsufficientDataException: fewer than 2 observations or zero sample variance.
    """
    if summary.n < 2:
        raise InsufficientDataException(f"a Student-t curve needs at least 2 observations, got {summary.n}")
    if summary.sd <= 0.0:
        raise InsufficientDataException("the sample has zero variance")
    return sf_location_scale(
        summary.mean,
        summary.standard_error,
        Family.STUDENT_T,
        df=summary.n - 1,
        grid=grid,
        points=points,
        provenance=provenance if provenance is not None else Provenance("student_t", SourceKind.OBJECTIVE),
    )


def sf_student_t(
    sample: Sequence[float],
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Student-t significance curve of a normal sample with unknown sd.
    """
    return sf_student_t_summary(SampleSummary.from_sample(sample), grid=grid, points=points, provenance=provenance)


def sf_normal_direct(
    mean: float,
    sd: float,
    grid: Optional[ParameterGrid] = None,
    points: int = DEFAULT_GRID_POINTS,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Subjective normal opinion N(mean, sd^2) taken directly as a significance curve.
    """
    sd = _check_positive("sd", sd)
    return sf_location_scale(
        mean,
        sd,
        Family.NORMAL,
        grid=grid,
        points=points,
        provenance=provenance if provenance is not None else Provenance("subjective_normal", SourceKind.SUBJECTIVE),
    )


def make_rng(seed: int) -> np.random.Generator:
    """
    PCG64 generator seeded through SeedSequence, so streams are identical on every platform.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def simulate_sample(model: NormalModelSpec, seed: int) -> npt.NDArray[np.float64]:
    return make_rng(seed).normal(model.theta, model.gamma, model.n)


def simulate_block(model: NormalModelSpec, replicates: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
    """
    `replicates` independent samples of the model, one per row.
    """
    return rng.normal(model.theta, model.gamma, size=(replicates, model.n))


def likelihood_product_mode(sources: Sequence[tuple[float, float]]) -> float:
    """
    Maximiser of the product of normal likelihoods N(mean_i, sd_i^2), the
    precision weighted mean.

    Example:
        >>> round(likelihood_product_mode([(740.0, 25.0), (760.0, 1.0)]), 3)
        759.968
    """
    if len(sources) == 0:
        raise DomainException("sources", list(sources), "non-empty sequences of (mean, sd)")

    means = np.array([float(mean) for mean, _ in sources])
    sds = np.array([_check_positive("sd", float(sd)) for _, sd in sources])
    if not np.all(np.isfinite(means)):
        raise InvalidInputException("mean", "all means must be finite")
    precisions = 1.0 / sds**2
    return float(np.sum(precisions * means) / np.sum(precisions))
