"""
Significance functions and the confidence measures they define.

A significance function F_x(theta) is held as a monotone curve on a finite
parameter grid and evaluated by piecewise-linear interpolation. Every
probability statement the library makes (p-values, confidence intervals,
the confidence of an arbitrary finite union of intervals) is read off
such a curve.
"""

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
import pandas as pd

from confidencemeasure.logging.exceptions import (
    DomainException,
    InvalidInputException,
    TailExtrapolationException,
)

DEFAULT_GRID_POINTS: int = 4001
TAIL_PROBABILITY: float = 1e-10
TAIL_MASS: float = 1e-3
GRID_TOLERANCE: float = 1e-6


class SourceKind(str, Enum):
    OBJECTIVE = "objective"
    SUBJECTIVE = "subjective"
    COMBINED = "combined"


class Alternative(str, Enum):
    GREATER = "greater"
    LESS = "less"
    TWO_SIDED = "two_sided"

    @classmethod
    def parse(cls, value: Union[str, "Alternative"]) -> "Alternative":
        if isinstance(value, Alternative):
            return value
        normalized = str(value).strip().lower().replace("-", "_")
        try:
            return cls(normalized)
        except ValueError:
            raise DomainException("alternative", value, "{greater, less, two_sided}") from None


@dataclass(frozen=True)
class Provenance:
    source_id: str = "source"
    kind: SourceKind = SourceKind.OBJECTIVE
    approximate: bool = False

    @property
    def label(self) -> str:
        suffix = ", approximate" if self.approximate else ""
        return f"{self.source_id} ({self.kind.value}{suffix})"


def _frozen_array(values: npt.ArrayLike) -> npt.NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    nodes: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidInputException("grid.nodes", "at least 2 nodes are required")
        if not np.all(np.isfinite(nodes)):
            raise InvalidInputException("grid.nodes", "all nodes must be finite")
        if not np.all(np.diff(nodes) > 0):
            raise InvalidInputException("grid.nodes", "nodes must be strictly increasing")
        object.__setattr__(self, "nodes", _frozen_array(nodes))

    @classmethod
    def linspace(cls, lower: float, upper: float, points: int = DEFAULT_GRID_POINTS) -> "ParameterGrid":
        if points < 2:
            raise DomainException("points", points, "[2, inf)")
        if not lower < upper:
            raise InvalidInputException("grid", f"min ({lower}) must be below max ({upper})")
        return cls(np.linspace(lower, upper, points))

    def __len__(self) -> int:
        return int(self.nodes.size)

    @property
    def lower(self) -> float:
        return float(self.nodes[0])

    @property
    def upper(self) -> float:
        return float(self.nodes[-1])


@dataclass(frozen=True)
class TailPolicy:
    """
    Values returned by a curve to the left and to the right of its grid.
    `None` continues the first (resp. last) grid value.
    """

    left: Optional[float] = None
    right: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SignificanceCurve:
    """
    Monotone CDF of the parameter of interest on a finite grid.

    The curve is both the significance function F_x evaluated at the observed
    data and, read as a distribution, the confidence measure P^x.

    Args:
        grid (ParameterGrid): Parameter values theta.
        cdf_values (array_like): F_x(theta) at every node, non-decreasing, within [0, 1].
        tail_policy (TailPolicy): Behaviour outside the grid. Defaults to saturating at the end values.
        provenance (Provenance): Where the curve comes from.
        tail_mass (float): Largest probability allowed below the first node and above the last.
    """

    grid: ParameterGrid
    cdf_values: npt.NDArray[np.float64]
    tail_policy: TailPolicy = field(default_factory=TailPolicy)
    provenance: Provenance = field(default_factory=Provenance)
    tail_mass: float = TAIL_MASS

    def __post_init__(self) -> None:
        values = np.asarray(self.cdf_values, dtype=np.float64)
        if values.shape != self.grid.nodes.shape:
            raise InvalidInputException("cdf_values", "one value per grid node is required")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
            raise InvalidInputException("cdf_values", "values must lie in [0, 1]")
        if not np.all(np.diff(values) >= 0.0):
            raise InvalidInputException("cdf_values", "values must be non-decreasing along the grid")
        if values[0] > self.tail_mass or values[-1] < 1.0 - self.tail_mass:
            raise InvalidInputException(
                "cdf_values",
                f"the grid must carry all but {self.tail_mass:g} of the mass in each tail "
                f"(first value {values[0]:.6g}, last value {values[-1]:.6g})",
            )

        left = values[0] if self.tail_policy.left is None else self.tail_policy.left
        right = values[-1] if self.tail_policy.right is None else self.tail_policy.right
        if not 0.0 <= left <= values[0] or not values[-1] <= right <= 1.0:
            raise InvalidInputException("tail_policy", "tail values must keep the curve monotone within [0, 1]")

        object.__setattr__(self, "cdf_values", _frozen_array(values))
        object.__setattr__(self, "tail_policy", TailPolicy(float(left), float(right)))

    def __repr__(self) -> str:
        return (
            f"SignificanceCurve[{self.provenance.label}, {len(self.grid)} nodes, "
            f"span=({self.grid.lower:g}, {self.grid.upper:g})]"
        )

    @property
    def nodes(self) -> npt.NDArray[np.float64]:
        return self.grid.nodes

    @property
    def probability_range(self) -> tuple[float, float]:
        return float(self.cdf_values[0]), float(self.cdf_values[-1])

    def cdf_at(self, thetas: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        Vectorised `eval_cdf` without the finiteness check.
        """
        return np.interp(
            np.asarray(thetas, dtype=np.float64),
            self.grid.nodes,
            self.cdf_values,
            left=self.tail_policy.left,
            right=self.tail_policy.right,
        )

    def median(self) -> float:
        return eval_quantile(self, 0.5)


@dataclass(frozen=True)
class IntervalUnion:
    """
    Finite union of disjoint half-open parameter intervals (lo, hi].
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        previous_hi = -math.inf
        for lo, hi in cleaned:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InvalidInputException("intervals", f"endpoints of ({lo}, {hi}] must be finite")
            if not lo < hi:
                raise InvalidInputException("intervals", f"({lo}, {hi}] must satisfy lo < hi")
            if lo < previous_hi:
                raise InvalidInputException("intervals", f"({lo}, {hi}] overlaps or precedes its predecessor")
            previous_hi = hi
        object.__setattr__(self, "intervals", cleaned)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def contains(self, theta: float) -> bool:
        return any(lo < theta <= hi for lo, hi in self.intervals)

    def to_list(self) -> list[list[float]]:
        return [[lo, hi] for lo, hi in self.intervals]


@dataclass(frozen=True)
class SetIndex:
    """
    Finite union of disjoint half-open subintervals (lo, hi] of [0, 1].
    Its level is the Lebesgue measure of the union.
    """

    subsets: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple((float(lo), float(hi)) for lo, hi in self.subsets)
        previous_hi = 0.0
        for lo, hi in cleaned:
            if not 0.0 <= lo < hi <= 1.0:
                raise InvalidInputException("set_index", f"({lo}, {hi}] must satisfy 0 <= lo < hi <= 1")
            if lo < previous_hi:
                raise InvalidInputException("set_index", f"({lo}, {hi}] overlaps or precedes its predecessor")
            previous_hi = hi
        object.__setattr__(self, "subsets", cleaned)

    @classmethod
    def empty(cls) -> "SetIndex":
        return cls(())

    @classmethod
    def full(cls) -> "SetIndex":
        return cls(((0.0, 1.0),))

    @classmethod
    def lower_tail(cls, level: float) -> "SetIndex":
        return cls(((0.0, level),))

    @classmethod
    def upper_tail(cls, level: float) -> "SetIndex":
        return cls(((1.0 - level, 1.0),))

    @classmethod
    def central(cls, level: float) -> "SetIndex":
        return cls((((1.0 - level) / 2.0, (1.0 + level) / 2.0),))

    def level(self) -> float:
        return float(sum(hi - lo for lo, hi in self.subsets))

    def contains(self, u: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        u = np.asarray(u, dtype=np.float64)
        mask = np.zeros(u.shape, dtype=bool)
        for lo, hi in self.subsets:
            mask |= (u > lo) & (u <= hi)
        return mask

    @property
    def label(self) -> str:
        if not self.subsets:
            return "{}"
        return "U".join(f"({lo:g},{hi:g}]" for lo, hi in self.subsets)


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidInputException(name, f"expected a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise InvalidInputException(name, f"expected a finite value, got {value!r}")
    return value


def eval_cdf(curve: SignificanceCurve, theta: float) -> float:
    """
    Returns F_x(theta) by monotone piecewise-linear interpolation, clamped to
    the tail values outside the grid.
    """
    theta = _check_finite("theta", theta)
    return float(curve.cdf_at(theta))


def eval_quantile(curve: SignificanceCurve, p: float) -> float:
    """
    Returns inf{theta : F_x(theta) >= p}.

    The segment holding p is found by binary search and inverted linearly.
    On flat stretches the left end point is returned.

    Raises:
        DomainException: p is not in (0, 1).
        TailExtrapolationException: p lies outside the probability range the curve represents.
    """
    p = _check_finite("p", p)
    if not 0.0 < p < 1.0:
        raise DomainException("p", p, "(0, 1)")

    values = curve.cdf_values
    nodes = curve.grid.nodes
    if p < values[0] or p > values[-1]:
        raise TailExtrapolationException(p, curve.probability_range)

    upper = int(np.searchsorted(values, p, side="left"))
    if values[upper] == p or upper == 0:
        return float(nodes[upper])

    lower = upper - 1
    weight = (p - values[lower]) / (values[upper] - values[lower])
    return float(nodes[lower] + weight * (nodes[upper] - nodes[lower]))


def _index_quantile(curve: SignificanceCurve, p: float) -> float:
    # 0 and 1 stand for the ends of the represented support
    if p <= 0.0:
        return curve.grid.lower
    if p >= 1.0:
        return curve.grid.upper
    return eval_quantile(curve, p)


def index_to_set(curve: SignificanceCurve, index: SetIndex) -> IntervalUnion:
    """
    Canonical set estimate F_x^{-1}(B): each (p1, p2] of the index becomes
    (F^{-1}(p1), F^{-1}(p2)]. Images of zero width are dropped.
    """
    intervals: list[tuple[float, float]] = []
    for p1, p2 in index.subsets:
        lo = _index_quantile(curve, p1)
        hi = _index_quantile(curve, p2)
        if hi > lo:
            intervals.append((lo, hi))
    return IntervalUnion(tuple(intervals))


def central_interval(curve: SignificanceCurve, alpha1: float, alpha2: float) -> IntervalUnion:
    """
    Returns (F^{-1}(alpha1), F^{-1}(1 - alpha2)], the interval of nominal level
    1 - alpha1 - alpha2. alpha1 = 0 (resp. alpha2 = 0) leaves the lower (resp.
    upper) end at the edge of the represented support.
    """
    alpha1 = _check_finite("alpha1", alpha1)
    alpha2 = _check_finite("alpha2", alpha2)
    if alpha1 < 0.0:
        raise DomainException("alpha1", alpha1, "[0, 1]")
    if alpha2 < 0.0:
        raise DomainException("alpha2", alpha2, "[0, 1]")
    if alpha1 + alpha2 > 1.0:
        raise DomainException("alpha1 + alpha2", alpha1 + alpha2, "[0, 1]")
    if alpha1 + alpha2 == 1.0:
        return IntervalUnion(())
    return index_to_set(curve, SetIndex(((alpha1, 1.0 - alpha2),)))


def p_value(curve: SignificanceCurve, theta0: float, alternative: Union[str, Alternative]) -> float:
    """
    p-value of H0: theta = theta0.

    greater -> F(theta0), less -> 1 - F(theta0),
    two_sided -> min(2 F(theta0), 2 (1 - F(theta0))).
    """
    alternative = Alternative.parse(alternative)
    value = eval_cdf(curve, theta0)
    if alternative is Alternative.GREATER:
        return value
    if alternative is Alternative.LESS:
        return 1.0 - value
    return min(2.0 * value, 2.0 * (1.0 - value), 1.0)


def set_probability(curve: SignificanceCurve, region: IntervalUnion) -> float:
    """
    Confidence P^x of a finite union of disjoint intervals: the sum of F(hi) - F(lo).
    """
    if not region.intervals:
        return 0.0
    bounds = np.asarray(region.intervals, dtype=np.float64)
    upper = curve.cdf_at(bounds[:, 1])
    lower = curve.cdf_at(bounds[:, 0])
    return float(np.sum(upper - lower))


def curve_to_frame(curve: SignificanceCurve) -> pd.DataFrame:
    return pd.DataFrame({"theta": curve.grid.nodes, "cdf": curve.cdf_values})


def dump_curve(curve: SignificanceCurve, path: str) -> None:
    """
    Writes the curve as CSV with header `theta,cdf`, one row per grid node.
    Floats are written with their shortest round-trip representation.
    """
    curve_to_frame(curve).to_csv(path, index=False, lineterminator="\n")


def load_curve(
    path: str,
    tail_policy: Optional[TailPolicy] = None,
    provenance: Optional[Provenance] = None,
) -> SignificanceCurve:
    """
    Reads a curve written by `dump_curve`; the values are reproduced bit for bit.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) != ["theta", "cdf"]:
        raise InvalidInputException(path, f"expected header `theta,cdf`, got {','.join(map(str, frame.columns))}")
    return SignificanceCurve(
        grid=ParameterGrid(frame["theta"].to_numpy(dtype=np.float64)),
        cdf_values=frame["cdf"].to_numpy(dtype=np.float64),
        tail_policy=tail_policy if tail_policy is not None else TailPolicy(),
        provenance=provenance if provenance is not None else Provenance(source_id=str(path)),
    )


def curve_from_values(
    nodes: Union[ParameterGrid, npt.ArrayLike],
    cdf_values: npt.ArrayLike,
    provenance: Optional[Provenance] = None,
    tail_policy: Optional[TailPolicy] = None,
) -> SignificanceCurve:
    """
    Builds a curve from raw node/value sequences, removing floating point
    wiggles of the order of round-off by a running maximum.
    A `ParameterGrid` passed as `nodes` is used as is.
    """
    values = np.maximum.accumulate(np.clip(np.asarray(cdf_values, dtype=np.float64), 0.0, 1.0))
    return SignificanceCurve(
        grid=nodes if isinstance(nodes, ParameterGrid) else ParameterGrid(np.asarray(nodes, dtype=np.float64)),
        cdf_values=values,
        tail_policy=tail_policy if tail_policy is not None else TailPolicy(),
        provenance=provenance if provenance is not None else Provenance(),
    )
