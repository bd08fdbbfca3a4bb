import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from confidencemeasure.combination import (
    CombinationResult,
    PolyCoefficients,
    combine,
    combine_tree,
    combined_pivot,
    de_cdf,
    de_l_cdf,
    de_l_cdf_monte_carlo,
    de_l_pdf,
    de_pdf,
    de_quantile,
    normal_de_pivot,
    v_polynomial,
)
from confidencemeasure.core import ParameterGrid, Provenance, SourceKind, eval_cdf, p_value
from confidencemeasure.logging.exceptions import DomainException, IncompatibleSourcesException, InvalidInputException
from confidencemeasure.math import normal_cdf
from confidencemeasure.models import sf_location_scale, sf_normal_direct, sf_student_t

SAMPLE_1 = [0.523, 2.460, 1.119]
SAMPLE_2 = [0.072, -2.275, -4.554, -0.077]


@pytest.fixture(scope="module")
def common_mean():
    return {
        "y1": sf_student_t(SAMPLE_1, provenance=Provenance("y1")),
        "y2": sf_student_t(SAMPLE_2, provenance=Provenance("y2")),
        "a1": sf_normal_direct(0.0, 3.0, provenance=Provenance("a1", SourceKind.SUBJECTIVE)),
        "a2": sf_normal_direct(2.0, 4.0, provenance=Provenance("a2", SourceKind.SUBJECTIVE)),
    }


# Laplace primitives
def test_de_cdf_and_quantile():
    assert de_cdf(0.0) == 0.5
    assert de_cdf(-math.log(2.0)) == pytest.approx(0.25)
    assert de_quantile(0.25) == pytest.approx(-math.log(2.0))
    assert de_pdf(0.0) == 0.5


@given(st.floats(min_value=1e-12, max_value=1.0 - 1e-12))
def test_de_quantile_inverts_cdf(p):
    assert de_cdf(de_quantile(p)) == pytest.approx(p, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, np.nan])
def test_de_quantile_domain(p):
    with pytest.raises(DomainException):
        de_quantile(p)


@pytest.mark.parametrize("z", [-6.0, -1.5, 0.0, 0.4, 3.0, 7.5])
def test_normal_de_pivot_matches_quantile_of_cdf(z):
    assert normal_de_pivot(z) == pytest.approx(de_quantile(normal_cdf(z)), rel=1e-9, abs=1e-12)


def test_normal_de_pivot_far_tails():
    z = np.array([-60.0, -40.0, 40.0, 60.0])
    pivot = np.asarray(normal_de_pivot(z))
    assert np.all(np.isfinite(pivot))
    assert np.allclose(pivot[::-1], -pivot)
    # -log(2 Phi(-z)) grows like z^2 / 2
    assert pivot[2] == pytest.approx(40.0**2 / 2.0, rel=0.01)


# V_L polynomials
@pytest.mark.parametrize(
    ("order", "expected"),
    [
        (1, [Fraction(1)]),
        (2, [Fraction(1), Fraction(1, 2)]),
        (3, [Fraction(1), Fraction(5, 8), Fraction(1, 8)]),
        (4, [Fraction(1), Fraction(11, 16), Fraction(3, 16), Fraction(1, 48)]),
    ],
)
def test_v_polynomial_coefficients(order, expected):
    poly = v_polynomial(order)
    assert list(poly.coefficients) == expected
    assert poly.order == order


@pytest.mark.parametrize("order", [0, -1, 2.0, True])
def test_v_polynomial_domain(order):
    with pytest.raises(DomainException):
        v_polynomial(order)


def test_poly_coefficients_constant_term():
    with pytest.raises(InvalidInputException):
        PolyCoefficients((Fraction(2), Fraction(1)))
    with pytest.raises(InvalidInputException):
        PolyCoefficients(())


def test_poly_coefficients_evaluation():
    poly = v_polynomial(3)
    assert poly(2.0) == pytest.approx(1.0 + 5.0 / 4.0 + 0.5)
    assert poly.derivative(2.0) == pytest.approx(5.0 / 8.0 + 0.5)


# DE_L
def test_de_l_cdf_one_source_is_laplace():
    q = np.linspace(-6.0, 6.0, 25)
    assert np.allclose(de_l_cdf(1, q), de_cdf(q), atol=1e-15)


@pytest.mark.parametrize("q", [-4.0, -0.5, 0.0, 0.3, 2.5])
def test_de_l_cdf_two_sources_closed_form(q):
    a = abs(q)
    tail = 0.5 * math.exp(-a) * (1.0 + a / 2.0)
    assert de_l_cdf(2, q) == pytest.approx(tail if q <= 0 else 1.0 - tail, abs=1e-15)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6])
def test_de_l_cdf_symmetry_and_limits(order):
    q = np.linspace(-30.0, 30.0, 601)
    values = np.asarray(de_l_cdf(order, q))
    assert np.allclose(values + np.asarray(de_l_cdf(order, -q)), 1.0, atol=1e-14)
    assert np.all(np.diff(values) >= 0.0)
    assert values[0] < 1e-6
    assert values[-1] > 1.0 - 1e-6
    assert de_l_cdf(order, 0.0) == 0.5


@pytest.mark.parametrize("order", [1, 3, 6])
def test_de_l_extreme_arguments(order):
    q = np.array([-1e200, -1e4, 1e4, 1e200, np.inf, -np.inf])
    cdf = np.asarray(de_l_cdf(order, q))
    assert not np.any(np.isnan(cdf))
    assert np.array_equal(cdf, [0.0, 0.0, 1.0, 1.0, 1.0, 0.0])
    assert np.array_equal(np.asarray(de_l_pdf(order, q)), np.zeros(6))


@pytest.mark.parametrize("q", [-3.0, -0.4, 0.0, 1.1, 5.0])
def test_de_l_cdf_four_sources_matches_convolution(q):
    def integrand(s):
        return float(de_l_cdf(3, q - s)) * 0.5 * math.exp(-abs(s))

    left, _ = integrate.quad(integrand, -np.inf, 0.0, epsabs=1e-12)
    right, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12)
    assert de_l_cdf(4, q) == pytest.approx(left + right, abs=1e-9)


@pytest.mark.parametrize("order", [1, 2, 3, 5])
def test_de_l_pdf_is_derivative(order):
    q = np.linspace(-8.0, 8.0, 16001)
    numeric = np.gradient(np.asarray(de_l_cdf(order, q)), q)
    interior = slice(1, -1)
    # order 1 has a kink at 0
    away = np.abs(q[interior]) > 1e-2 if order == 1 else slice(None)
    assert np.allclose(np.asarray(de_l_pdf(order, q))[interior][away], numeric[interior][away], atol=1e-5)


def test_de_l_pdf_integrates_to_one():
    total, _ = integrate.quad(lambda s: float(de_l_pdf(4, s)), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_de_l_cdf_matches_monte_carlo():
    q = np.array([-4.0, -1.0, 0.0, 0.7, 3.0])
    simulated = np.asarray(de_l_cdf_monte_carlo(4, q, draws=400_000, seed=3))
    assert np.allclose(simulated, np.asarray(de_l_cdf(4, q)), atol=0.004)


@pytest.mark.slow
@pytest.mark.parametrize("order", [2, 3, 5])
def test_de_l_cdf_ks_distance_to_simulation(order):
    q = np.linspace(-12.0, 12.0, 961)
    simulated = np.asarray(de_l_cdf_monte_carlo(order, q, draws=1_000_000, seed=order))
    assert np.max(np.abs(simulated - np.asarray(de_l_cdf(order, q)))) <= 0.002


def test_monte_carlo_domain():
    with pytest.raises(DomainException):
        de_l_cdf_monte_carlo(0, 0.0)
    with pytest.raises(DomainException):
        de_l_cdf_monte_carlo(2, 0.0, draws=0)


# combine
def test_combine_single_curve_is_identity(common_mean):
    result = combine([common_mean["y1"]])
    assert result.curve is common_mean["y1"]
    assert result.source_count == 1
    assert result.source_ids == ("y1",)


def test_combine_requires_curves():
    with pytest.raises(DomainException):
        combine([])


def test_combine_two_normals_matches_closed_form():
    first = sf_normal_direct(0.0, 1.0, provenance=Provenance("f"))
    second = sf_normal_direct(0.0, 1.0, provenance=Provenance("g"))
    result = combine([first, second])
    p = 0.15865525393145707
    q = 2.0 * math.log(2.0 * p)
    expected = 0.5 * math.exp(q) * (1.0 - q / 2.0)
    assert eval_cdf(result.curve, -1.0) == pytest.approx(expected, abs=1e-6)
    assert eval_cdf(result.curve, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_combined_curve_provenance_and_grid(common_mean):
    first = common_mean["a1"]
    relabelled = Provenance("a2", SourceKind.SUBJECTIVE, approximate=True)
    second = dataclasses.replace(common_mean["a2"], provenance=relabelled)
    result = combine([first, second])
    curve = result.curve
    assert result.label == "(a1,a2)"
    assert curve.provenance.kind is SourceKind.COMBINED
    assert curve.provenance.approximate
    assert curve.grid.lower == max(first.grid.lower, second.grid.lower)
    assert curve.grid.upper == min(first.grid.upper, second.grid.upper)
    assert np.all(np.isin(curve.nodes, np.concatenate([first.nodes, second.nodes])))
    assert np.all(np.diff(curve.cdf_values) >= 0.0)
    assert combine([first, second], label="opinions").label == "opinions"


def test_combine_is_order_independent(common_mean):
    forward = combine([common_mean["y1"], common_mean["a1"]]).curve
    backward = combine([common_mean["a1"], common_mean["y1"]]).curve
    assert np.array_equal(forward.nodes, backward.nodes)
    assert np.allclose(forward.cdf_values, backward.cdf_values, atol=1e-14)


def test_combine_rejects_disjoint_spans():
    with pytest.raises(IncompatibleSourcesException) as e:
        combine([sf_normal_direct(0.0, 1.0), sf_normal_direct(100.0, 1.0)])
    assert len(e.value.spans) == 2


def test_combine_rejects_spans_missing_mass():
    # the first grid stops where its curve still holds almost 1e-3 of mass
    truncated = sf_location_scale(0.0, 1.0, grid=ParameterGrid.linspace(-3.1, 8.0, 2001))
    with pytest.raises(IncompatibleSourcesException, match="misses"):
        combine([truncated, sf_normal_direct(-3.0, 1.0)])


def test_combined_pivot(common_mean):
    curves = [common_mean["y1"], common_mean["y2"]]
    expected = sum(de_quantile(eval_cdf(curve, -1.0)) for curve in curves)
    assert float(combined_pivot(curves, -1.0)) == pytest.approx(expected)


# Common-mean example
def test_common_mean_source_curves(common_mean):
    assert eval_cdf(common_mean["y1"], -1.0) == pytest.approx(0.02693, abs=5e-5)
    assert eval_cdf(common_mean["y2"], -1.0) == pytest.approx(0.7190, abs=5e-4)


def test_common_mean_two_way_p_value(common_mean):
    result = combine([common_mean["y1"], common_mean["y2"]])
    assert p_value(result.curve, -1.0, "greater") == pytest.approx(0.104, abs=1e-3)


def test_common_mean_two_way_matches_monte_carlo(common_mean):
    curves = [common_mean["y1"], common_mean["y2"]]
    pivot = float(combined_pivot(curves, -1.0))
    simulated = float(de_l_cdf_monte_carlo(2, pivot, draws=400_000, seed=11))
    assert p_value(combine(curves).curve, -1.0, "greater") == pytest.approx(simulated, abs=0.003)


# combine_tree
def test_combine_tree_is_bottom_up(common_mean):
    y1, y2, a1, a2 = (common_mean[key] for key in ("y1", "y2", "a1", "a2"))
    tree = combine_tree([[y1, y2], [a1, a2]])
    manual = combine([combine([y1, y2]).curve, combine([a1, a2]).curve])
    assert tree.source_ids == ("(y1,y2)", "(a1,a2)")
    assert tree.label == "((y1,y2),(a1,a2))"
    assert np.array_equal(tree.curve.cdf_values, manual.curve.cdf_values)


def test_grouping_is_not_additive(common_mean):
    y1, y2, a1, a2 = (common_mean[key] for key in ("y1", "y2", "a1", "a2"))
    flat = p_value(combine([y1, y2, a1, a2]).curve, -1.0, "greater")
    grouped = p_value(combine_tree([[y1, y2], [a1, a2]]).curve, -1.0, "greater")
    assert abs(flat - grouped) > 1e-3


def test_combine_tree_leaves(common_mean):
    y1 = common_mean["y1"]
    leaf = combine_tree(y1)
    assert isinstance(leaf, CombinationResult)
    assert leaf.curve is y1
    assert combine_tree(leaf) is leaf
    assert combine_tree([[y1]]).curve is y1


@pytest.mark.parametrize("groups", [[], [[]], "y1", 3.0])
def test_combine_tree_rejects_malformed_groups(groups):
    with pytest.raises((DomainException, InvalidInputException)):
        combine_tree(groups)
