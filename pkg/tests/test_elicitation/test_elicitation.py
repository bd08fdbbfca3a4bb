from unittest.mock import Mock

import numpy as np
import pytest

from confidencemeasure.combination import de_quantile
from confidencemeasure.core import TAIL_PROBABILITY, ParameterGrid, SourceKind, central_interval, eval_cdf
from confidencemeasure.elicitation import (
    TAIL_NODES,
    AgentNoiseSpec,
    ElicitedIntervals,
    ElicitedPoints,
    HypotheticalKind,
    HypotheticalModel,
    TailCompletion,
    complete_tails,
    density_mode,
    finite_difference_density,
    sf_from_bayes_posterior,
    sf_from_elicited_intervals,
    sf_from_elicited_pvalues,
    sf_from_hypothetical_data,
)
from confidencemeasure.logging.exceptions import (
    DomainException,
    ElicitationInconsistencyException,
    InsufficientDataException,
    InvalidInputException,
)
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.models import SampleSummary, sf_normal_known_sigma

Z_95 = 1.6448536269514722


@pytest.fixture
def elicited():
    return ElicitedPoints(((-2.0, 0.05), (0.0, 0.4), (1.0, 0.7), (3.0, 0.95)))


# ElicitedPoints
def test_elicited_points_accessors(elicited):
    assert len(elicited) == 4
    assert list(elicited.thetas) == [-2.0, 0.0, 1.0, 3.0]
    assert list(elicited.probabilities) == [0.05, 0.4, 0.7, 0.95]


def test_elicited_points_from_arrays():
    points = ElicitedPoints.from_arrays([0.0, 1.0], [0.2, 0.8])
    assert points.points == ((0.0, 0.2), (1.0, 0.8))
    with pytest.raises(InvalidInputException):
        ElicitedPoints.from_arrays([0.0, 1.0], [0.2])


@pytest.mark.parametrize(
    "points",
    [
        ((0.0, 0.3), (1.0, 0.2)),
        ((0.0, 0.3), (1.0, 0.3)),
        ((1.0, 0.3), (0.0, 0.6)),
        ((1.0, 0.3), (1.0, 0.6)),
    ],
)
def test_elicited_points_must_increase(points):
    with pytest.raises(ElicitationInconsistencyException):
        ElicitedPoints(points)


@pytest.mark.parametrize("p", [0.0, 1.0, 1.5])
def test_elicited_points_probability_domain(p):
    with pytest.raises(DomainException):
        ElicitedPoints(((0.0, p),))


def test_elicited_points_reject_non_finite_theta():
    with pytest.raises(InvalidInputException):
        ElicitedPoints(((np.inf, 0.5),))


# sf_from_elicited_pvalues
def test_curve_passes_through_elicited_points(elicited):
    curve = sf_from_elicited_pvalues(elicited)
    assert curve.provenance.kind is SourceKind.SUBJECTIVE
    for theta, p in elicited.points:
        assert eval_cdf(curve, theta) == p


def test_tails_reach_tail_probability(elicited):
    curve = sf_from_elicited_pvalues(elicited)
    assert len(curve.grid) == len(elicited) + 2 * TAIL_NODES
    assert curve.cdf_values[0] == pytest.approx(TAIL_PROBABILITY, rel=1e-9)
    assert curve.cdf_values[-1] == pytest.approx(1.0 - TAIL_PROBABILITY, abs=1e-15)
    assert np.all(np.diff(curve.cdf_values) > 0.0)


def test_tails_are_linear_in_laplace_pivot(elicited):
    thetas, values = complete_tails(elicited)
    pivots = np.asarray(de_quantile(values))
    left = slice(0, TAIL_NODES + 2)
    slope = (pivots[TAIL_NODES + 1] - pivots[TAIL_NODES]) / (thetas[TAIL_NODES + 1] - thetas[TAIL_NODES])
    assert np.allclose(np.diff(pivots[left]) / np.diff(thetas[left]), slope, rtol=1e-8)


def test_no_tail_completion_requires_tail_points():
    close_tails = ElicitedPoints(((-5.0, 0.0005), (0.0, 0.5), (5.0, 0.9995)))
    curve = sf_from_elicited_pvalues(close_tails, TailCompletion.NONE)
    assert len(curve.grid) == 3

    with pytest.raises(InvalidInputException):
        sf_from_elicited_pvalues(ElicitedPoints(((0.0, 0.2), (1.0, 0.8))), TailCompletion.NONE)


def test_too_few_points():
    with pytest.raises(InsufficientDataException):
        sf_from_elicited_pvalues(ElicitedPoints(((0.0, 0.5),)))


# ElicitedIntervals
def test_intervals_to_points():
    intervals = ElicitedIntervals(((0.9, -Z_95, Z_95), (0.5, -0.5, 0.6)))
    points = intervals.to_points(0.0)
    assert points.points == (
        (-Z_95, pytest.approx(0.05)),
        (-0.5, 0.25),
        (0.0, 0.5),
        (0.6, 0.75),
        (Z_95, pytest.approx(0.95)),
    )


def test_intervals_curve():
    curve = sf_from_elicited_intervals(ElicitedIntervals(((0.9, -Z_95, Z_95),)), 0.0)
    assert curve.provenance.source_id == "elicited_intervals"
    assert eval_cdf(curve, -Z_95) == pytest.approx(0.05)
    assert eval_cdf(curve, 0.0) == 0.5
    assert eval_cdf(curve, Z_95) == pytest.approx(0.95)


def test_intervals_are_recovered_as_central_intervals():
    entries = ((0.5, -0.5, 0.6), (0.8, -1.2, 1.5), (0.9, -Z_95, Z_95))
    curve = sf_from_elicited_intervals(ElicitedIntervals(entries), 0.1)
    for level, lo, hi in entries:
        alpha = (1.0 - level) / 2.0
        (interval,) = central_interval(curve, alpha, alpha).intervals
        assert interval == pytest.approx((lo, hi), abs=1e-9)


@pytest.mark.parametrize(
    "entries",
    [
        ((0.5, -1.0, 1.0), (0.9, -0.5, 2.0)),
        ((0.5, -1.0, 1.0), (0.5, -2.0, 2.0)),
    ],
)
def test_intervals_must_nest(entries):
    with pytest.raises(ElicitationInconsistencyException):
        ElicitedIntervals(entries)


def test_intervals_validation():
    with pytest.raises(InsufficientDataException):
        ElicitedIntervals(())
    with pytest.raises(DomainException):
        ElicitedIntervals(((1.0, -1.0, 1.0),))
    with pytest.raises(InvalidInputException):
        ElicitedIntervals(((0.5, 1.0, -1.0),))


def test_intervals_median_outside():
    with pytest.raises(ElicitationInconsistencyException):
        ElicitedIntervals(((0.5, -1.0, 1.0),)).to_points(2.0)


# sf_from_hypothetical_data
def test_hypothetical_reading():
    curve = sf_from_hypothetical_data(HypotheticalModel(HypotheticalKind.KNOWN_SIGMA, 25.0), [740.0])
    assert eval_cdf(curve, 740.0) == pytest.approx(0.5)
    assert eval_cdf(curve, 715.0) == pytest.approx(0.15865525393145707, abs=1e-6)
    assert curve.provenance.kind is SourceKind.SUBJECTIVE


def test_hypothetical_student_t():
    curve = sf_from_hypothetical_data(HypotheticalModel("student_t"), [1.0, 2.0, 3.0])
    assert eval_cdf(curve, 2.0) == pytest.approx(0.5)


def test_hypothetical_on_explicit_grid():
    grid = ParameterGrid.linspace(590.0, 890.0, 301)
    curve = sf_from_hypothetical_data(HypotheticalModel(HypotheticalKind.KNOWN_SIGMA, 25.0), [740.0], grid=grid)
    assert np.array_equal(curve.nodes, grid.nodes)
    assert eval_cdf(curve, 715.0) == pytest.approx(0.15865525393145707, abs=1e-9)


@pytest.mark.parametrize(
    ("model", "sample"),
    [
        (HypotheticalModel(HypotheticalKind.KNOWN_SIGMA), [740.0]),
        (HypotheticalModel(HypotheticalKind.KNOWN_SIGMA, 25.0), []),
        (HypotheticalModel(HypotheticalKind.STUDENT_T, 25.0), [1.0, 2.0]),
        (HypotheticalModel(HypotheticalKind.STUDENT_T), [1.0]),
    ],
)
def test_hypothetical_mismatch(model, sample):
    with pytest.raises(DomainException):
        sf_from_hypothetical_data(model, sample)


# sf_from_bayes_posterior
def test_posterior_with_matching_prior(elicited):
    curve = sf_from_bayes_posterior(elicited, matching_declared=True, source_id="post")
    assert not curve.provenance.approximate
    assert curve.provenance.source_id == "post"


def test_posterior_without_matching_prior_is_flagged(elicited, monkeypatch):
    warning = Mock()
    monkeypatch.setattr(LOGGER, "warning", warning)
    curve = sf_from_bayes_posterior(elicited, matching_declared=False)
    assert curve.provenance.approximate
    warning.assert_called_once()
    assert "flagged approximate" in warning.call_args.args[0]
    # values are not altered
    assert np.array_equal(curve.cdf_values, sf_from_elicited_pvalues(elicited).cdf_values)


# density_mode
def test_finite_difference_density_of_normal():
    curve = sf_normal_known_sigma(SampleSummary(1, 3.0), 2.0)
    nodes, density = finite_difference_density(curve)
    peak = float(nodes[int(np.argmax(density))])
    assert peak == pytest.approx(3.0, abs=0.01)
    assert np.max(density) == pytest.approx(1.0 / (2.0 * np.sqrt(2.0 * np.pi)), rel=1e-4)


@pytest.mark.parametrize(("mean", "sd"), [(3.0, 2.0), (-1.5, 0.3), (760.0, 1.0)])
def test_density_mode_of_normal(mean, sd):
    curve = sf_normal_known_sigma(SampleSummary(1, mean), sd)
    assert density_mode(curve) == pytest.approx(mean, abs=2e-3)


def test_density_mode_resolution_domain():
    curve = sf_normal_known_sigma(SampleSummary(1, 0.0), 1.0)
    with pytest.raises(DomainException):
        density_mode(curve, resolution=0.0)


def test_agent_noise_spec():
    assert AgentNoiseSpec(0.5).noise_sd == 0.5
    assert repr(AgentNoiseSpec()) == "AgentNoiseSpec(noise_sd=0.0)"
    with pytest.raises(DomainException):
        AgentNoiseSpec(-1.0)
