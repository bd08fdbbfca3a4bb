"""
Double-exponential combination of independent significance functions.

Each significance function F_l is mapped to the Laplace scale by DE^-1, the
pivots are summed and the sum is mapped back by DE_L, the CDF of a sum of L
independent standard Laplace variables:

    F~(theta) = DE_L(sum_l DE^-1(F_l(theta)))

DE_L has the closed form

    DE_L(q) = 1 - exp(-q) / 2 * V_L(q)     for q >= 0
    DE_L(q) = exp(q) / 2 * V_L(-q)         for q <= 0

where V_L is a polynomial of degree L - 1 with V_L(0) = 1.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Any, Union

import numpy as np
import numpy.typing as npt
from numpy.polynomial import polynomial

from confidencemeasure.core.core import (
    TAIL_MASS,
    Provenance,
    SignificanceCurve,
    SourceKind,
    curve_from_values,
)
from confidencemeasure.logging.exceptions import (
    DomainException,
    IncompatibleSourcesException,
    InvalidInputException,
)
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.math.math import ArrayOrFloat, as_output, clamp_probability, normal_log_cdf
from confidencemeasure.models.models import make_rng

PIVOT_CLAMP: float = 1e-15
# exp(-q) is 0.0 in double precision beyond this
EXP_UNDERFLOW: float = 800.0


def de_cdf(q: npt.ArrayLike) -> ArrayOrFloat:
    """
    CDF of the standard Laplace (double exponential) distribution.

    Example:
        >>> de_cdf(0.0)
        0.5
    """
    q = np.asarray(q, dtype=np.float64)
    half_tail = 0.5 * np.exp(-np.abs(q))
    return as_output(np.where(q <= 0.0, half_tail, 1.0 - half_tail))


def de_pdf(q: npt.ArrayLike) -> ArrayOrFloat:
    q = np.asarray(q, dtype=np.float64)
    return as_output(0.5 * np.exp(-np.abs(q)))


def de_quantile(p: npt.ArrayLike) -> ArrayOrFloat:
    """
    Inverse of `de_cdf`: log(2p) for p <= 1/2 and -log(2(1 - p)) above.

    Raises:
        DomainException: some p is not in (0, 1).
    """
    p = np.asarray(p, dtype=np.float64)
    valid = (p > 0.0) & (p < 1.0)
    if not np.all(valid):
        raise DomainException("p", float(p[~valid].ravel()[0]), "(0, 1)")
    return as_output(np.where(p <= 0.5, np.log(2.0 * p), -np.log(2.0 * (1.0 - p))))


def normal_de_pivot(z: npt.ArrayLike) -> ArrayOrFloat:
    """
    DE^-1(Phi(z)) computed from log Phi of the nearer tail, so it stays finite
    and accurate where Phi(z) rounds to 0 or 1.

    Example:
        >>> normal_de_pivot(0.0)
        0.0
    """
    z = np.asarray(z, dtype=np.float64)
    near_tail = np.log(2.0) + np.asarray(normal_log_cdf(-np.abs(z)))
    return as_output(np.where(z <= 0.0, near_tail, -near_tail))


@dataclass(frozen=True)
class PolyCoefficients:
    """
    Exact coefficients of V_L, constant term first.
    """

    coefficients: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.coefficients) < 1:
            raise InvalidInputException("coefficients", "at least the constant term is required")
        if self.coefficients[0] != 1:
            raise InvalidInputException("coefficients", f"the constant term must be 1, got {self.coefficients[0]}")

    @property
    def order(self) -> int:
        """Number of Laplace variables L, the length of the coefficient list."""
        return len(self.coefficients)

    def as_floats(self) -> npt.NDArray[np.float64]:
        return np.array([float(c) for c in self.coefficients], dtype=np.float64)

    def __call__(self, q: npt.ArrayLike) -> ArrayOrFloat:
        return as_output(np.asarray(polynomial.polyval(np.asarray(q, dtype=np.float64), self.as_floats())))

    def derivative(self, q: npt.ArrayLike) -> ArrayOrFloat:
        return as_output(
            np.asarray(polynomial.polyval(np.asarray(q, dtype=np.float64), polynomial.polyder(self.as_floats())))
        )


@lru_cache(maxsize=None)
def _v_coefficients(order: int) -> tuple[Fraction, ...]:
    if order == 1:
        return (Fraction(1),)

    a = _v_coefficients(order - 1)
    # V_{L+1}(q) = 1/2 * sum_k a_k sum_{j<=k} k!/j! q^j / 2^(k-j+1)   (mass of DE_L beyond q, convolved)
    #            + 1/2 * int_0^q V_L(s) ds + 1 - M/2,  M = sum_k a_k k! / 2^(k+1)
    result = [Fraction(0)] * order
    for k, a_k in enumerate(a):
        for j in range(k + 1):
            result[j] += a_k * Fraction(factorial(k), factorial(j)) / 2 ** (k - j + 2)
        result[k + 1] += a_k / (2 * (k + 1))
    mass = sum((a_k * factorial(k) / Fraction(2 ** (k + 1)) for k, a_k in enumerate(a)), Fraction(0))
    result[0] += 1 - mass / 2
    return tuple(result)


def v_polynomial(order: int) -> PolyCoefficients:
    """
    Coefficients of V_L by exact convolution of DE_L with one more Laplace density.

    Example:
        >>> [str(c) for c in v_polynomial(3).coefficients]
        ['1', '5/8', '1/8']
    """
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)) or order < 1:
        raise DomainException("L", order, "integers >= 1")
    return PolyCoefficients(_v_coefficients(int(order)))


def de_l_cdf(order: int, q: npt.ArrayLike) -> ArrayOrFloat:
    """
    CDF of the sum of `order` independent standard Laplace variables.

    Example:
        >>> de_l_cdf(4, 0.0)
        0.5
    """
    poly = v_polynomial(order)
    q = np.asarray(q, dtype=np.float64)
    magnitude = np.minimum(np.abs(q), EXP_UNDERFLOW)
    half_tail = 0.5 * np.exp(-magnitude) * np.asarray(poly(magnitude))
    return as_output(np.where(q <= 0.0, half_tail, 1.0 - half_tail))


def de_l_pdf(order: int, q: npt.ArrayLike) -> ArrayOrFloat:
    """
    Density of DE_L: exp(-|q|) / 2 * (V_L(|q|) - V_L'(|q|)).
    """
    poly = v_polynomial(order)
    magnitude = np.minimum(np.abs(np.asarray(q, dtype=np.float64)), EXP_UNDERFLOW)
    return as_output(0.5 * np.exp(-magnitude) * (np.asarray(poly(magnitude)) - np.asarray(poly.derivative(magnitude))))


def de_l_cdf_monte_carlo(order: int, q: npt.ArrayLike, draws: int = 1_000_000, seed: int = 0) -> ArrayOrFloat:
    """
    Empirical CDF at `q` of `draws` simulated sums of `order` standard Laplace
    variables. Used as an independent check of `de_l_cdf`.
    """
    if order < 1:
        raise DomainException("L", order, "integers >= 1")
    if draws < 1:
        raise DomainException("draws", draws, "integers >= 1")
    rng = make_rng(seed)
    sums = np.sort(rng.laplace(0.0, 1.0, size=(draws, order)).sum(axis=1))
    counts = np.searchsorted(sums, np.asarray(q, dtype=np.float64), side="right")
    return as_output(np.asarray(counts, dtype=np.float64) / draws)


@dataclass(frozen=True)
class CombinationResult:
    curve: SignificanceCurve
    source_count: int
    source_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.source_count < 1:
            raise DomainException("source_count", self.source_count, "integers >= 1")

    @property
    def label(self) -> str:
        return self.curve.provenance.source_id


def _spans(curves: Sequence[SignificanceCurve]) -> list[tuple[float, float]]:
    return [(curve.grid.lower, curve.grid.upper) for curve in curves]


def combined_pivot(curves: Sequence[SignificanceCurve], thetas: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    sum_l DE^-1(F_l(theta)) with every F_l clamped to [PIVOT_CLAMP, 1 - PIVOT_CLAMP].
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    total = np.zeros(thetas.shape, dtype=np.float64)
    for curve in curves:
        total += np.asarray(de_quantile(clamp_probability(curve.cdf_at(thetas), PIVOT_CLAMP)))
    return total


def combine(curves: Sequence[SignificanceCurve], label: str = "") -> CombinationResult:
    """
    Combines L independent significance curves into F~ = DE_L(sum DE^-1(F_l)).

    The output grid is the sorted union of the input grids restricted to the
    span they have in common. A single curve is returned unchanged.

    Args:
        curves (Sequence[SignificanceCurve]): Curves of independent sources.
        label (str): Source id of the result. Defaults to "(id1,id2,...)".

    Raises:
        DomainException: no curves.
        IncompatibleSourcesException: the grids do not overlap, or their
            common span misses more than TAIL_MASS of the combined mass.
    """
    curves = list(curves)
    if not curves:
        raise DomainException("curves", 0, "L >= 1 curves")

    source_ids = tuple(curve.provenance.source_id for curve in curves)
    if len(curves) == 1:
        return CombinationResult(curves[0], 1, source_ids)

    spans = _spans(curves)
    lower = max(lo for lo, _ in spans)
    upper = min(hi for _, hi in spans)
    if not lower < upper:
        raise IncompatibleSourcesException(spans)

    nodes = np.unique(np.concatenate([curve.grid.nodes for curve in curves]))
    nodes = nodes[(nodes >= lower) & (nodes <= upper)]

    order = len(curves)
    values = np.asarray(de_l_cdf(order, combined_pivot(curves, nodes)))
    if values[0] > TAIL_MASS or values[-1] < 1.0 - TAIL_MASS:
        raise IncompatibleSourcesException(
            spans, reason=f"the common span [{lower:g}, {upper:g}] misses more than {TAIL_MASS:g} of the combined mass"
        )

    label = label or "(" + ",".join(source_ids) + ")"
    provenance = Provenance(
        source_id=label,
        kind=SourceKind.COMBINED,
        approximate=any(curve.provenance.approximate for curve in curves),
    )
    LOGGER.debug(f"[combination] {label}: L={order}, {nodes.size} nodes on [{lower:g}, {upper:g}]")
    return CombinationResult(
        curve_from_values(nodes, values, provenance=provenance),
        order,
        source_ids,
    )


CurveTree = Union[SignificanceCurve, CombinationResult, Sequence[Any]]


def combine_tree(groups: CurveTree) -> CombinationResult:
    """
    Combines a nested grouping bottom-up: every inner sequence is combined
    with `combine` and its result enters its parent as a single source.
    Grouping changes the result, ((F1, F2), (G1, G2)) differs from
    (F1, F2, G1, G2) in general.

    Raises:
        DomainException: an empty group.
    """
    if isinstance(groups, CombinationResult):
        return groups
    if isinstance(groups, SignificanceCurve):
        return CombinationResult(groups, 1, (groups.provenance.source_id,))
    if isinstance(groups, (str, bytes)) or not isinstance(groups, Sequence):
        raise InvalidInputException("groups", f"expected curves or nested sequences, got {type(groups).__name__}")
    if len(groups) == 0:
        raise DomainException("groups", [], "non-empty groups")

    children = [combine_tree(group) for group in groups]
    if len(children) == 1:
        return children[0]
    return combine([child.curve for child in children])
