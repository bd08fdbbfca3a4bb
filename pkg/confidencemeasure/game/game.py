"""
Monte Carlo betting game between a statistician and a client.

The statistician posts odds rho / (1 - rho) on the event that the true
parameter lies in the set estimate F_x^{-1}(B) of level rho = lambda(B). The
client may take either side of the bet for every B of a suite. The fair
odds are c / (1 - c), c being the true coverage rate of the set estimate,
and the expected loss of the statistician is |rho - c| whenever the posted
odds differ from the fair ones. A calibrated significance function has
c = lambda(B) for every B, hence zero risk against arbitrary hypotheses.
"""

import json
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Optional, TypeVar

import numpy as np
import numpy.typing as npt
import pandas as pd

from confidencemeasure.collections.validators import Integer
from confidencemeasure.combination.combination import PIVOT_CLAMP, de_l_cdf, de_quantile
from confidencemeasure.core.core import SetIndex, SignificanceCurve, index_to_set
from confidencemeasure.elicitation.elicitation import AgentNoiseSpec
from confidencemeasure.logging.exceptions import (
    DomainException,
    InfiniteOddsException,
    InsufficientDataException,
    InvalidInputException,
    TailExtrapolationException,
)
from confidencemeasure.logging.logger import LOGGER
from confidencemeasure.math.math import (
    clamp_probability,
    ks_uniform_distance,
    normal_cdf,
    student_t_cdf,
)
from confidencemeasure.models.models import (
    Family,
    NormalModelSpec,
    SampleSummary,
    sf_location_scale,
    simulate_block,
)

DEFAULT_BLOCK_SIZE: int = 2048
DEFAULT_LEVELS: tuple[float, ...] = (0.5, 0.8, 0.9, 0.95, 0.99)
MIN_REPORTED_REPLICATES: int = 1000
EQUALITY_BAND: float = 2.0

T = TypeVar("T")


class EstimatorKind(str, Enum):
    STUDENT_T = "student_t"
    KNOWN_SIGMA = "known_sigma"


@dataclass(frozen=True)
class EstimatorSpec:
    """
    Rule mapping a sample to a significance curve.

    The pivot z = (theta - mean) / se is replaced by z / scale - shift, so
    `shift` moves the curve by shift * scale * se and `scale` inflates its
    spread. shift = 0 and scale = 1 give the calibrated estimator.

    Args:
        kind (EstimatorKind): STUDENT_T estimates the sd, KNOWN_SIGMA uses `sigma`.
        shift (float): Pivot shift in pivot units. Defaults to 0.
        scale (float): Pivot spread multiplier, strictly positive. Defaults to 1.
        sigma (float): Known population sd, required by KNOWN_SIGMA.
        description (str): Label used in reports.
    """

    kind: EstimatorKind = EstimatorKind.STUDENT_T
    shift: float = 0.0
    scale: float = 1.0
    sigma: Optional[float] = None
    description: str = "calibrated"

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if not math.isfinite(self.shift):
            raise DomainException("shift", self.shift, "(-inf, inf)")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainException("scale", self.scale, "(0, inf)")
        if self.kind is EstimatorKind.KNOWN_SIGMA and (
            self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0.0
        ):
            raise DomainException("sigma", self.sigma, "(0, inf), required by the known_sigma estimator")

    @classmethod
    def calibrated(cls) -> "EstimatorSpec":
        return cls()

    @classmethod
    def known_sigma(cls, sigma: float) -> "EstimatorSpec":
        return cls(EstimatorKind.KNOWN_SIGMA, sigma=sigma, description=f"known_sigma:{sigma:g}")

    @classmethod
    def shifted(cls, shift: float) -> "EstimatorSpec":
        return cls(shift=shift, description=f"shift:{shift:g}")

    @classmethod
    def scaled(cls, scale: float) -> "EstimatorSpec":
        return cls(scale=scale, description=f"scale:{scale:g}")

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        """
        Parses "calibrated", "shift:<v>" or "scale:<v>".
        """
        name, _, value = text.strip().partition(":")
        if name == "calibrated" and not value:
            return cls.calibrated()
        if name in ("shift", "scale") and value:
            try:
                number = float(value)
            except ValueError:
                raise InvalidInputException("estimator", f"`{value}` is not a number") from None
            return cls.shifted(number) if name == "shift" else cls.scaled(number)
        raise InvalidInputException("estimator", f"expected calibrated, shift:<v> or scale:<v>, got `{text}`")

    @property
    def is_calibrated(self) -> bool:
        return self.shift == 0.0 and self.scale == 1.0

    @property
    def family(self) -> Family:
        return Family.STUDENT_T if self.kind is EstimatorKind.STUDENT_T else Family.NORMAL

    def _standard_errors(self, n: int, sds: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        if self.kind is EstimatorKind.STUDENT_T:
            return sds / math.sqrt(n)
        if self.sigma is None:
            raise DomainException("sigma", None, "(0, inf), required by the known_sigma estimator")
        return np.full(sds.shape, self.sigma / math.sqrt(n))

    def build(self, sample: Sequence[float]) -> SignificanceCurve:
        summary = SampleSummary.from_sample(sample)
        if self.kind is EstimatorKind.STUDENT_T and (summary.n < 2 or summary.sd <= 0.0):
            raise InsufficientDataException("the Student-t estimator needs at least 2 distinct observations")
        se = float(self._standard_errors(summary.n, np.array([summary.sd]))[0])
        spread = self.scale * se
        return sf_location_scale(
            summary.mean + self.shift * spread,
            spread,
            self.family,
            df=summary.n - 1 if self.kind is EstimatorKind.STUDENT_T else None,
        )

    def evaluate(self, samples: npt.NDArray[np.float64], theta: float) -> npt.NDArray[np.float64]:
        """
        F_x(theta) for every row of `samples`, computed from the pivot without
        building the curves.
        """
        n = samples.shape[1]
        means = samples.mean(axis=1)
        sds = samples.std(axis=1, ddof=1) if self.kind is EstimatorKind.STUDENT_T else np.zeros(samples.shape[0])
        z = (theta - means) / (self.scale * self._standard_errors(n, sds)) - self.shift
        if self.kind is EstimatorKind.STUDENT_T:
            return np.asarray(student_t_cdf(z, n - 1), dtype=np.float64)
        return np.asarray(normal_cdf(z), dtype=np.float64)


def default_b_suite() -> tuple[SetIndex, ...]:
    """
    Lower, upper and central indices at levels 0.5, 0.8, 0.9, 0.95 and 0.99,
    plus the disconnected index (0.05, 0.10] U (0.50, 0.99].
    """
    suite: list[SetIndex] = []
    for level in DEFAULT_LEVELS:
        suite.extend([SetIndex.lower_tail(level), SetIndex.upper_tail(level), SetIndex.central(level)])
    suite.append(SetIndex(((0.05, 0.10), (0.50, 0.99))))
    return tuple(suite)


class GameConfig:
    """
    Simulation settings of the betting game.

    Args:
        model (NormalModelSpec): Sampling model; model.theta is the true parameter.
        b_suite (Sequence[SetIndex]): Indices the client may bet on. Defaults to `default_b_suite()`.
        replicates (int): Number of simulated samples. Defaults to 10000.
        seed (int): Root seed. Defaults to 0.
        workers (int): Threads used to simulate blocks. Defaults to 1.
        exact_sets (bool): Build every curve and its set estimates instead of
            using the pivot. Defaults to False.
        block_size (int): Replicates per block. Defaults to DEFAULT_BLOCK_SIZE.
    """

    replicates = Integer(min_value=1)
    seed = Integer(min_value=0)
    workers = Integer(min_value=1)
    block_size = Integer(min_value=1)

    def __init__(
        self,
        model: NormalModelSpec,
        b_suite: Optional[Sequence[SetIndex]] = None,
        replicates: int = 10_000,
        seed: int = 0,
        workers: int = 1,
        exact_sets: bool = False,
        block_size: int = DEFAULT_BLOCK_SIZE,
    ) -> None:
        self.model = model
        self.b_suite = tuple(b_suite) if b_suite is not None else default_b_suite()
        if not self.b_suite:
            raise InvalidInputException("b_suite", "at least one index is required")
        self.replicates = replicates
        self.seed = seed
        self.workers = workers
        self.exact_sets = bool(exact_sets)
        self.block_size = block_size
        if replicates < MIN_REPORTED_REPLICATES:
            LOGGER.warning(
                f"[{self.__repr__()}] {replicates} replicates, statistics need at least "
                f"{MIN_REPORTED_REPLICATES} to be reported"
            )

    def __repr__(self) -> str:
        return f"GameConfig(model={self.model!r}, replicates={self.replicates}, seed={self.seed})"

    def with_suite(self, b_suite: Sequence[SetIndex]) -> "GameConfig":
        return GameConfig(
            self.model, b_suite, self.replicates, self.seed, self.workers, self.exact_sets, self.block_size
        )


def run_blocks(
    replicates: int,
    seed: int,
    workers: int,
    block_size: int,
    task: Callable[[int, int, np.random.Generator], T],
) -> list[T]:
    """
    Splits `replicates` into blocks of `block_size`, runs `task(index, size, rng)`
    for every block and returns the results in block order. Block `i` draws
    from PCG64 seeded with the i-th child of SeedSequence(seed), so results do
    not depend on `workers`.
    """
    full, rest = divmod(replicates, block_size)
    sizes = [block_size] * full
    if rest:
        sizes.append(rest)
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(index: int) -> T:
        return task(index, sizes[index], np.random.Generator(np.random.PCG64(children[index])))

    if workers == 1 or len(sizes) == 1:
        return [run(index) for index in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


@dataclass
class ReplicateStream:
    """
    Per-replicate outcome of one simulation run.

    Attributes:
        pivots: F_X(theta_true) of every replicate.
        covered: covered[r, j] is True when replicate r's set estimate for index j contains theta_true.
        excluded: excluded[r, j] is True when index j was unattainable for replicate r.
    """

    pivots: npt.NDArray[np.float64]
    covered: npt.NDArray[np.bool_]
    excluded: npt.NDArray[np.bool_]


def _exact_block(
    est: EstimatorSpec, samples: npt.NDArray[np.float64], theta: float, suite: Sequence[SetIndex]
) -> tuple[npt.NDArray[np.bool_], npt.NDArray[np.bool_]]:
    covered = np.zeros((samples.shape[0], len(suite)), dtype=bool)
    excluded = np.zeros_like(covered)
    for row, sample in enumerate(samples):
        curve = est.build(sample)
        for column, index in enumerate(suite):
            try:
                covered[row, column] = index_to_set(curve, index).contains(theta)
            except TailExtrapolationException:
                excluded[row, column] = True
    return covered, excluded


def replicate_stream(est: EstimatorSpec, cfg: GameConfig) -> ReplicateStream:
    """
    Simulates cfg.replicates samples and records, for every index of the suite,
    whether the set estimate covers the true parameter.

    On the default path coverage is read from U = F_X(theta_true): theta_true
    lies in F_X^{-1}(B) exactly when U lies in B.
    """
    model = cfg.model
    if est.kind is EstimatorKind.STUDENT_T and model.n < 2:
        raise InsufficientDataException(f"the Student-t estimator needs samples of at least 2, got n={model.n}")

    def task(index: int, size: int, rng: np.random.Generator) -> ReplicateStream:
        samples = simulate_block(model, size, rng)
        pivots = est.evaluate(samples, model.theta)
        if cfg.exact_sets:
            covered, excluded = _exact_block(est, samples, model.theta, cfg.b_suite)
        else:
            covered = np.column_stack([index.contains(pivots) for index in cfg.b_suite])
            excluded = np.zeros_like(covered)
        LOGGER.trace(
            {
                "block": index,
                "replicates": size,
                "seed": cfg.seed,
                "estimator": est.description,
                "mean_pivot": float(np.mean(pivots)),
                "excluded": int(np.count_nonzero(excluded)),
            }
        )
        return ReplicateStream(pivots, covered, excluded)

    blocks = run_blocks(cfg.replicates, cfg.seed, cfg.workers, cfg.block_size, task)
    return ReplicateStream(
        pivots=np.concatenate([block.pivots for block in blocks]),
        covered=np.concatenate([block.covered for block in blocks]),
        excluded=np.concatenate([block.excluded for block in blocks]),
    )


@dataclass(frozen=True)
class BRecord:
    index: str
    level: float
    coverage: float
    coverage_se: float
    fair_odds: Optional[float]
    odds_se: Optional[float]
    odds_bound: Optional[float]
    odds_bound_direction: Optional[str]
    expected_loss: float
    loss_se: float
    replicates: int
    excluded: int


@dataclass(frozen=True)
class RiskResult:
    risk: float
    index: str
    se: float


def _coverage_se(coverage: float, count: int) -> float:
    # floor keeps the binomial standard error positive at coverage 0 or 1
    bounded = min(max(coverage, 0.5 / count), 1.0 - 0.5 / count)
    return math.sqrt(bounded * (1.0 - bounded) / count)


def _odds_bound(coverage: float, count: int) -> tuple[float, str]:
    # rule of three: the true rate is within 3 / count of the observed 0 or 1 at 95%
    rate = min(3.0 / count, 1.0)
    if coverage >= 1.0:
        return (1.0 - rate) / rate, "lower"
    return rate / (1.0 - rate) if rate < 1.0 else math.inf, "upper"


def _record(index: SetIndex, covered: npt.NDArray[np.bool_], excluded: npt.NDArray[np.bool_]) -> BRecord:
    used = covered[~excluded]
    count = int(used.size)
    if count == 0:
        raise InsufficientDataException(f"every replicate was excluded for index {index.label}")

    level = index.level()
    coverage = float(np.mean(used))
    coverage_se = _coverage_se(coverage, count)
    bounded = min(max(coverage, 0.5 / count), 1.0 - 0.5 / count)
    odds_se = coverage_se / (1.0 - bounded) ** 2

    odds: Optional[float] = None
    bound: Optional[float] = None
    direction: Optional[str] = None
    if 0.0 < coverage < 1.0:
        odds = coverage / (1.0 - coverage)
    else:
        bound, direction = _odds_bound(coverage, count)
        # no finite bound from 3 or fewer replicates
        if not math.isfinite(bound):
            bound = None

    return BRecord(
        index=index.label,
        level=level,
        coverage=coverage,
        coverage_se=coverage_se,
        fair_odds=odds,
        odds_se=odds_se if odds is not None else None,
        odds_bound=bound,
        odds_bound_direction=direction,
        expected_loss=_loss(level, coverage, odds, odds_se),
        loss_se=coverage_se,
        replicates=count,
        excluded=int(np.count_nonzero(excluded)),
    )


def _loss(level: float, coverage: float, odds: Optional[float], odds_se: float) -> float:
    """
    Expected loss of posting odds level / (1 - level) when the fair odds are
    `odds`: level * P(miss) - (1 - level) * P(cover) = level - coverage when the
    posted odds are too long, its negation when they are too short and 0 when
    they agree within EQUALITY_BAND standard errors.
    """
    if level in (0.0, 1.0) or odds is None:
        if coverage == level:
            return 0.0
        return abs(level - coverage)

    posted = level / (1.0 - level)
    if abs(posted - odds) < EQUALITY_BAND * odds_se:
        return 0.0
    value = level * (1.0 - coverage) - (1.0 - level) * coverage
    return value if posted > odds else -value


def _single(est: EstimatorSpec, index: SetIndex, cfg: GameConfig) -> BRecord:
    stream = replicate_stream(est, cfg.with_suite((index,)))
    return _record(index, stream.covered[:, 0], stream.excluded[:, 0])


def coverage_rate(est: EstimatorSpec, index: SetIndex, cfg: GameConfig) -> float:
    """
    Fraction of replicates whose set estimate F_x^{-1}(B) contains the true parameter.
    """
    return _single(est, index, cfg).coverage


def fair_odds(est: EstimatorSpec, index: SetIndex, cfg: GameConfig) -> float:
    """
    coverage / (1 - coverage).

    Raises:
        InfiniteOddsException: coverage is exactly 0 or 1; carries a one-sided 95% bound.
    """
    record = _single(est, index, cfg)
    if record.fair_odds is None:
        bound, direction = _odds_bound(record.coverage, record.replicates)
        raise InfiniteOddsException(record.coverage, bound, direction)
    return record.fair_odds


def expected_loss(est: EstimatorSpec, index: SetIndex, cfg: GameConfig) -> float:
    return _single(est, index, cfg).expected_loss


def _max_risk(records: Sequence[BRecord]) -> RiskResult:
    worst = max(records, key=lambda record: record.expected_loss)
    return RiskResult(risk=worst.expected_loss, index=worst.index, se=worst.loss_se)


def max_risk(est: EstimatorSpec, cfg: GameConfig) -> RiskResult:
    """
    Largest expected loss over the suite, using the canonical set estimates F_x^{-1}(B).
    """
    return _max_risk(play(est, cfg).records)


def calibration_ks(est: EstimatorSpec, cfg: GameConfig) -> float:
    """
    Kolmogorov-Smirnov distance of F_X(theta_true) over the replicates from Uniform(0, 1).
    """
    return ks_uniform_distance(replicate_stream(est, cfg).pivots)


def agent_noise_calibration(noise: AgentNoiseSpec, cfg: GameConfig, noise_aware: bool = True) -> float:
    """
    Kolmogorov-Smirnov distance from Uniform(0, 1) of the agent curve
    G(theta_true) = Phi((theta_true - mean(X + Y)) / s), where one draw
    Y ~ N(0, tau^2) is added to every observation of a sample.

    With `noise_aware`, s = sqrt(gamma^2 / n + tau^2); otherwise the noise is
    ignored and s = gamma / sqrt(n).
    """
    model = cfg.model
    tau = float(noise.noise_sd)
    if tau < 0.0:
        raise DomainException("noise_sd", tau, "[0, inf)")
    spread = math.sqrt(model.gamma**2 / model.n + tau**2) if noise_aware else model.standard_error

    def task(index: int, size: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        samples = simulate_block(model, size, rng)
        recalled = samples + rng.normal(0.0, tau, size=(size, 1))
        return np.asarray(normal_cdf((model.theta - recalled.mean(axis=1)) / spread), dtype=np.float64)

    pivots = run_blocks(cfg.replicates, cfg.seed, cfg.workers, cfg.block_size, task)
    return ks_uniform_distance(np.concatenate(pivots))


@dataclass(frozen=True)
class GameReport:
    estimator: str
    model: dict[str, float]
    replicates: int
    seed: int
    exact_sets: bool
    calibration_ks: float
    records: tuple[BRecord, ...]
    max_risk: RiskResult
    excluded_replicates: int = 0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimator": self.estimator,
            "model": dict(self.model),
            "replicates": self.replicates,
            "seed": self.seed,
            "exact_sets": self.exact_sets,
            "calibration_ks": self.calibration_ks,
            "excluded_replicates": self.excluded_replicates,
            "max_risk": asdict(self.max_risk),
            "records": [asdict(record) for record in self.records],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(record) for record in self.records])


def play(est: EstimatorSpec, cfg: GameConfig) -> GameReport:
    """
    Runs the betting game over the whole suite from one replicate stream.
    """
    stream = replicate_stream(est, cfg)
    records = tuple(
        _record(index, stream.covered[:, column], stream.excluded[:, column])
        for column, index in enumerate(cfg.b_suite)
    )
    excluded = int(np.count_nonzero(stream.excluded.any(axis=1)))
    notes: list[str] = []
    if cfg.replicates < MIN_REPORTED_REPLICATES:
        notes.append(f"fewer than {MIN_REPORTED_REPLICATES} replicates, statistics are indicative only")
    if excluded:
        notes.append(f"{excluded} replicates had unattainable index endpoints and were excluded")

    return GameReport(
        estimator=est.description,
        model={"theta": float(cfg.model.theta), "gamma": float(cfg.model.gamma), "n": int(cfg.model.n)},
        replicates=cfg.replicates,
        seed=cfg.seed,
        exact_sets=cfg.exact_sets,
        calibration_ks=ks_uniform_distance(stream.pivots),
        records=records,
        max_risk=_max_risk(records),
        excluded_replicates=excluded,
        notes=tuple(notes),
    )


def _common_theta(designs: Sequence[NormalModelSpec]) -> float:
    if not designs:
        raise DomainException("designs", [], "non-empty sequences of models")
    thetas = {float(design.theta) for design in designs}
    if len(thetas) != 1:
        raise InvalidInputException("designs", f"all designs must share the true mean, got {sorted(thetas)}")
    for design in designs:
        if design.n < 2:
            raise InsufficientDataException(f"Student-t curves need samples of at least 2, got n={design.n}")
    return thetas.pop()


def combined_pivots(
    designs: Sequence[NormalModelSpec], size: int, rng: np.random.Generator
) -> npt.NDArray[np.float64]:
    """
    F~_X(theta_true) = DE_L(sum_l DE^-1(T_{n_l - 1}(t_l))) for `size` replicates,
    one independent Student-t sample per design.
    """
    theta = float(designs[0].theta)
    total = np.zeros(size, dtype=np.float64)
    for design in designs:
        samples = simulate_block(design, size, rng)
        pivots = EstimatorSpec.calibrated().evaluate(samples, theta)
        total += np.asarray(de_quantile(clamp_probability(pivots, PIVOT_CLAMP)))
    return np.asarray(de_l_cdf(len(designs), total), dtype=np.float64)


def _combined_stream(
    designs: Sequence[NormalModelSpec], replicates: int, seed: int, workers: int
) -> npt.NDArray[np.float64]:
    _common_theta(designs)

    def task(index: int, size: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        return combined_pivots(designs, size, rng)

    return np.concatenate(run_blocks(replicates, seed, workers, DEFAULT_BLOCK_SIZE, task))


def combination_coverage(
    designs: Sequence[NormalModelSpec],
    level: float = 0.95,
    replicates: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """
    Coverage rate of the central interval of the given level taken from the
    DE-combined Student-t curves of independent samples, one per design.
    """
    if not 0.0 < level < 1.0:
        raise DomainException("level", level, "(0, 1)")
    pivots = _combined_stream(designs, replicates, seed, workers)
    return float(np.mean(SetIndex.central(level).contains(pivots)))


def combination_calibration_ks(
    designs: Sequence[NormalModelSpec],
    replicates: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """
    Kolmogorov-Smirnov distance of the DE-combined pivot from Uniform(0, 1).
    """
    return ks_uniform_distance(_combined_stream(designs, replicates, seed, workers))
