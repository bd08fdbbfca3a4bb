import math

import numpy as np
import pytest

from confidencemeasure.core import ParameterGrid, SourceKind, eval_cdf, eval_quantile
from confidencemeasure.logging.exceptions import DomainException, InsufficientDataException, InvalidInputException
from confidencemeasure.math import normal_cdf
from confidencemeasure.models import (
    Family,
    NormalModelSpec,
    SampleSummary,
    default_pivot_nodes,
    likelihood_product_mode,
    make_rng,
    sf_location_scale,
    sf_normal_direct,
    sf_normal_known_sigma,
    sf_student_t,
    sf_student_t_summary,
    simulate_block,
    simulate_sample,
)


def _t2(t):
    return 0.5 * (1.0 + t / math.sqrt(t * t + 2.0))


# SampleSummary
def test_sample_summary_from_sample():
    summary = SampleSummary.from_sample([1.0, 2.0, 3.0, 4.0])
    assert summary.n == 4
    assert summary.mean == 2.5
    assert summary.sd == pytest.approx(math.sqrt(5.0 / 3.0))
    assert summary.standard_error == pytest.approx(math.sqrt(5.0 / 3.0) / 2.0)


def test_sample_summary_single_observation():
    assert SampleSummary.from_sample([3.0]).sd == 0.0


@pytest.mark.parametrize("sample", [[], [1.0, np.nan]])
def test_sample_summary_rejects_bad_samples(sample):
    with pytest.raises((InsufficientDataException, InvalidInputException)):
        SampleSummary.from_sample(sample)


@pytest.mark.parametrize(("n", "sd"), [(0, 1.0), (2, -1.0), (True, 1.0)])
def test_sample_summary_domain(n, sd):
    with pytest.raises(DomainException):
        SampleSummary(n, 0.0, sd)


# NormalModelSpec
def test_normal_model_spec():
    model = NormalModelSpec(1.0, 2.0, 4)
    assert model.standard_error == 1.0
    assert model == NormalModelSpec(1.0, 2.0, 4)
    assert hash(model) == hash(NormalModelSpec(1.0, 2.0, 4))
    assert repr(model) == "NormalModelSpec(theta=1.0, gamma=2.0, n=4)"


@pytest.mark.parametrize(("theta", "gamma", "n"), [(1.0, 0.0, 3), (1.0, -1.0, 3), (1.0, 1.0, 0), (math.inf, 1.0, 3)])
def test_normal_model_spec_domain(theta, gamma, n):
    with pytest.raises(DomainException):
        NormalModelSpec(theta, gamma, n)


def test_normal_model_spec_rejects_float_n():
    with pytest.raises(InvalidInputException):
        NormalModelSpec(1.0, 1.0, 3.0)


# Default grid
@pytest.mark.parametrize(("family", "df"), [(Family.NORMAL, None), (Family.STUDENT_T, 1.0), (Family.STUDENT_T, 3.0)])
def test_default_pivot_nodes_are_symmetric(family, df):
    nodes = default_pivot_nodes(family, df)
    assert nodes.size == 4001
    assert np.all(np.diff(nodes) > 0)
    assert np.array_equal(nodes, -nodes[::-1])
    assert nodes[2000] == 0.0
    assert not nodes.flags.writeable


def test_default_pivot_nodes_cover_heavy_tails():
    nodes = default_pivot_nodes(Family.STUDENT_T, 1.0)
    # Cauchy quantile of 1 - 1e-10
    assert nodes[-1] == pytest.approx(1.0 / math.tan(math.pi * 1e-10), rel=1e-5)


# Curve factories
def test_known_sigma_curve():
    curve = sf_normal_known_sigma(SampleSummary(4, 1.0), 2.0)
    assert curve.provenance.kind is SourceKind.OBJECTIVE
    assert eval_cdf(curve, 0.0) == pytest.approx(0.15865525393145707, abs=1e-6)
    assert eval_quantile(curve, 0.5) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("t", [-20.0, -2.0, -0.3, 0.0, 1.0, 5.0])
def test_student_t_curve_matches_closed_form(t):
    # mean 0, sd 1, n = 3 -> standard error 1 / sqrt(3) and 2 degrees of freedom
    sample = [-1.0, 0.0, 1.0]
    curve = sf_student_t(sample)
    se = 1.0 / math.sqrt(3.0)
    assert eval_cdf(curve, t * se) == pytest.approx(_t2(t), abs=1e-6)


def test_student_t_requires_spread():
    with pytest.raises(InsufficientDataException):
        sf_student_t([1.0])
    with pytest.raises(InsufficientDataException):
        sf_student_t([2.0, 2.0, 2.0])
    with pytest.raises(InsufficientDataException):
        sf_student_t_summary(SampleSummary(1, 0.0))


def test_normal_direct_is_subjective():
    curve = sf_normal_direct(2.0, 4.0)
    assert curve.provenance.kind is SourceKind.SUBJECTIVE
    assert eval_cdf(curve, 2.0) == pytest.approx(0.5)
    with pytest.raises(DomainException):
        sf_normal_direct(0.0, 0.0)


def test_location_scale_on_explicit_grid():
    grid = ParameterGrid.linspace(-10.0, 10.0, 201)
    curve = sf_location_scale(0.0, 1.0, grid=grid)
    assert curve.grid is grid
    assert np.allclose(curve.cdf_values, normal_cdf(grid.nodes))


def test_location_scale_rejects_narrow_grid():
    with pytest.raises(InvalidInputException):
        sf_location_scale(0.0, 1.0, grid=ParameterGrid.linspace(-1.0, 1.0, 11))


def test_location_scale_requires_df():
    with pytest.raises(InvalidInputException):
        sf_location_scale(0.0, 1.0, Family.STUDENT_T)
    with pytest.raises(DomainException):
        sf_location_scale(0.0, 1.0, Family.STUDENT_T, df=0.0)


# Simulation
def test_simulation_is_reproducible():
    model = NormalModelSpec(1.0, 1.0, 3)
    assert np.array_equal(simulate_sample(model, 7), simulate_sample(model, 7))
    assert not np.array_equal(simulate_sample(model, 7), simulate_sample(model, 8))


def test_simulated_sample_moments():
    sample = simulate_sample(NormalModelSpec(2.5, 1.0, 100_000), 11)
    assert sample.shape == (100_000,)
    assert np.mean(sample) == pytest.approx(2.5, abs=0.01)
    assert np.std(sample, ddof=1) == pytest.approx(1.0, abs=0.01)


def test_simulate_block_shape():
    block = simulate_block(NormalModelSpec(0.0, 1.0, 5), 100, make_rng(0))
    assert block.shape == (100, 5)


# Likelihood product
def test_likelihood_product_mode_torricelli():
    assert likelihood_product_mode([(760.0, 1.0), (740.0, 25.0)]) == pytest.approx(759.968, abs=1e-3)


def test_likelihood_product_mode_rejects_empty():
    with pytest.raises(DomainException):
        likelihood_product_mode([])
