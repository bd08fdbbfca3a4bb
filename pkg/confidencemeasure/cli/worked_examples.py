"""
Worked examples with published reference values.

Each report puts computed values next to the published ones with an
agreement flag instead of asserting equality; two of the published
p-values cannot be reproduced from the stated inputs.
"""

import os
from collections.abc import Sequence
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from confidencemeasure.combination.combination import (
    combine,
    combine_tree,
    combined_pivot,
    de_l_cdf_monte_carlo,
    de_l_pdf,
    normal_de_pivot,
)
from confidencemeasure.core.core import (
    Alternative,
    Provenance,
    SignificanceCurve,
    SourceKind,
    dump_curve,
    p_value,
)
from confidencemeasure.elicitation.elicitation import (
    HypotheticalKind,
    HypotheticalModel,
    density_mode,
    sf_from_hypothetical_data,
)
from confidencemeasure.logging.exceptions import DomainException
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.math.math import normal_log_pdf
from confidencemeasure.models.models import (
    SampleSummary,
    likelihood_product_mode,
    sf_normal_direct,
    sf_normal_known_sigma,
    sf_student_t,
)

EXAMPLES: tuple[str, ...] = ("torricelli", "common-mean")

TORRICELLI_READING: tuple[float, float] = (760.0, 1.0)
TORRICELLI_OPINION: tuple[float, float] = (740.0, 25.0)
TORRICELLI_GRID_POINTS: int = 100_001
PUBLISHED_PRODUCT_MODE: float = 759.968
PUBLISHED_ABCU_MODE: float = 759.231
MODE_TOLERANCE: float = 0.01
PRODUCT_MODE_TOLERANCE: float = 0.001

COMMON_MEAN_SAMPLES: tuple[tuple[float, ...], ...] = ((0.523, 2.460, 1.119), (0.072, -2.275, -4.554, -0.077))
COMMON_MEAN_OPINIONS: tuple[tuple[float, float], ...] = ((0.0, 3.0), (2.0, 4.0))
COMMON_MEAN_NULL: float = -1.0
PUBLISHED_TWO_WAY: float = 0.104
PUBLISHED_FOUR_WAY: float = 0.049
PUBLISHED_TREE: float = 0.054
PVALUE_TOLERANCE: float = 0.005
MONTE_CARLO_TOLERANCE: float = 0.002
NON_ADDITIVITY_THRESHOLD: float = 0.001


def _comparison(computed: float, published: float, tolerance: float) -> dict[str, Any]:
    return {
        "computed": computed,
        "published": published,
        "tolerance": tolerance,
        "agrees": bool(abs(computed - published) <= tolerance),
    }


def _dump(curves: dict[str, SignificanceCurve], dump_dir: Optional[str], prefix: str) -> list[str]:
    if dump_dir is None:
        return []
    os.makedirs(dump_dir, exist_ok=True)
    paths = []
    for name, curve in curves.items():
        path = os.path.join(dump_dir, f"{prefix}_{name}.csv")
        dump_curve(curve, path)
        paths.append(path)
    return paths


def abcu_density(thetas: npt.ArrayLike, sources: Sequence[tuple[float, float]]) -> npt.NDArray[np.float64]:
    """
    Closed-form density of the DE-combination of normal curves N(mean_l, sd_l^2):

        f~(theta) = DE_L'(s) * sum_l phi(z_l) / sd_l / DE'(DE^-1(Phi(z_l)))

    with z_l = (theta - mean_l) / sd_l and s = sum_l DE^-1(Phi(z_l)).
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    total = np.zeros(thetas.shape)
    chain = np.zeros(thetas.shape)
    for mean, sd in sources:
        z = (thetas - mean) / sd
        pivot = np.asarray(normal_de_pivot(z))
        total += pivot
        # phi(z) / DE'(pivot) in log form; both factors underflow in the far tails
        chain += np.exp(np.asarray(normal_log_pdf(z)) + np.abs(pivot) + np.log(2.0)) / sd
    return np.asarray(de_l_pdf(len(sources), total)) * chain


def torricelli_report(dump_dir: Optional[str] = None) -> dict[str, Any]:
    """
    A barometer reading of 760 with sd 1 combined with an opinion equivalent
    to a reading of 740 with sd 25.
    """
    objective = sf_normal_known_sigma(
        SampleSummary(1, TORRICELLI_READING[0]),
        TORRICELLI_READING[1],
        points=TORRICELLI_GRID_POINTS,
        provenance=Provenance("reading", SourceKind.OBJECTIVE),
    )
    subjective = sf_from_hypothetical_data(
        HypotheticalModel(HypotheticalKind.KNOWN_SIGMA, TORRICELLI_OPINION[1]),
        [TORRICELLI_OPINION[0]],
        points=TORRICELLI_GRID_POINTS,
        provenance=Provenance("opinion", SourceKind.SUBJECTIVE),
    )
    combined = combine([objective, subjective], label="torricelli").curve

    product_mode = likelihood_product_mode([TORRICELLI_READING, TORRICELLI_OPINION])
    computed_mode = density_mode(combined)

    search = np.arange(750.0, 770.0 + 5e-4, 1e-3)
    oracle_mode = float(search[int(np.argmax(abcu_density(search, [TORRICELLI_READING, TORRICELLI_OPINION])))])
    LOGGER.info(f"[torricelli] product mode {product_mode:.3f}, combined mode {computed_mode:.3f}")

    abcu = _comparison(computed_mode, PUBLISHED_ABCU_MODE, MODE_TOLERANCE)
    abcu.update(oracle=oracle_mode, oracle_agrees=bool(abs(computed_mode - oracle_mode) <= MODE_TOLERANCE))
    return {
        "example": "torricelli",
        "likelihood_product_mode": _comparison(product_mode, PUBLISHED_PRODUCT_MODE, PRODUCT_MODE_TOLERANCE),
        "abcu_mode": abcu,
        "dumps": _dump(
            {"objective": objective, "subjective": subjective, "combined": combined}, dump_dir, "torricelli"
        ),
    }


def common_mean_curves() -> dict[str, SignificanceCurve]:
    """
    Student-t curves y1, y2 of the two samples and the subjective normal curves a1, a2.
    """
    curves = {
        f"y{i + 1}": sf_student_t(sample, provenance=Provenance(f"y{i + 1}", SourceKind.OBJECTIVE))
        for i, sample in enumerate(COMMON_MEAN_SAMPLES)
    }
    curves.update(
        {
            f"a{i + 1}": sf_normal_direct(mean, sd, provenance=Provenance(f"a{i + 1}", SourceKind.SUBJECTIVE))
            for i, (mean, sd) in enumerate(COMMON_MEAN_OPINIONS)
        }
    )
    return curves


def _with_oracle(
    curve: SignificanceCurve,
    inputs: Sequence[SignificanceCurve],
    published: float,
    draws: int,
    seed: int,
) -> dict[str, Any]:
    computed = p_value(curve, COMMON_MEAN_NULL, Alternative.GREATER)
    pivot = float(combined_pivot(inputs, COMMON_MEAN_NULL))
    oracle = float(de_l_cdf_monte_carlo(len(inputs), pivot, draws=draws, seed=seed))
    record = _comparison(computed, published, PVALUE_TOLERANCE)
    record.update(monte_carlo=oracle, monte_carlo_agrees=bool(abs(computed - oracle) <= MONTE_CARLO_TOLERANCE))
    return record


def common_mean_report(draws: int = 1_000_000, seed: int = 0, dump_dir: Optional[str] = None) -> dict[str, Any]:
    """
    p-values of theta = -1 against theta > -1 from the two samples alone, from
    the samples and both opinions at once, and from combining the combined
    samples with the combined opinions.
    """
    curves = common_mean_curves()
    y1, y2, a1, a2 = curves["y1"], curves["y2"], curves["a1"], curves["a2"]

    two_way = combine([y1, y2])
    four_way = combine([y1, y2, a1, a2])
    samples, opinions = two_way.curve, combine([a1, a2]).curve
    tree = combine_tree([[y1, y2], [a1, a2]])
    consistent = p_value(tree.curve, COMMON_MEAN_NULL, "greater") == p_value(
        combine([samples, opinions]).curve, COMMON_MEAN_NULL, "greater"
    )

    flat_value = p_value(four_way.curve, COMMON_MEAN_NULL, "greater")
    tree_value = p_value(tree.curve, COMMON_MEAN_NULL, "greater")
    LOGGER.info(f"[common-mean] flat {flat_value:.4f}, tree {tree_value:.4f}")
    return {
        "example": "common-mean",
        "null": COMMON_MEAN_NULL,
        "alternative": Alternative.GREATER.value,
        "two_way": _with_oracle(two_way.curve, [y1, y2], PUBLISHED_TWO_WAY, draws, seed),
        "four_way": _with_oracle(four_way.curve, [y1, y2, a1, a2], PUBLISHED_FOUR_WAY, draws, seed),
        "tree": dict(
            _with_oracle(tree.curve, [samples, opinions], PUBLISHED_TREE, draws, seed),
            expression="((y1,y2),(a1,a2))",
            internally_consistent=consistent,
        ),
        "non_additivity": {
            "difference": abs(flat_value - tree_value),
            "threshold": NON_ADDITIVITY_THRESHOLD,
            "non_additive": bool(abs(flat_value - tree_value) > NON_ADDITIVITY_THRESHOLD),
        },
        "dumps": _dump(
            {"two_way": two_way.curve, "four_way": four_way.curve, "tree": tree.curve}, dump_dir, "common_mean"
        ),
    }


def run_example(name: str, draws: int = 1_000_000, seed: int = 0, dump_dir: Optional[str] = None) -> dict[str, Any]:
    if name == "torricelli":
        return torricelli_report(dump_dir)
    if name == "common-mean":
        return common_mean_report(draws, seed, dump_dir)
    raise DomainException("example", name, "{" + ", ".join(EXAMPLES) + "}")
