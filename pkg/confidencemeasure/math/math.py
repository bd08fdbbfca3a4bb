from typing import Union

import numpy as np
import numpy.typing as npt
from scipy import special, stats

ArrayOrFloat = Union[float, npt.NDArray[np.float64]]


def as_output(value: npt.NDArray[np.float64]) -> ArrayOrFloat:
    if np.ndim(value) == 0:
        return float(value)
    return value


def normal_cdf(x: npt.ArrayLike) -> ArrayOrFloat:
    """
    Standard normal cumulative distribution function Phi.

    Example:
        >>> round(normal_cdf(1.0), 10)
        0.8413447461
    """
    return as_output(special.ndtr(np.asarray(x, dtype=np.float64)))


def normal_quantile(p: npt.ArrayLike) -> ArrayOrFloat:
    """
    Inverse of `normal_cdf`.

    Example:
        >>> round(normal_quantile(0.975), 10)
        1.9599639845
    """
    return as_output(special.ndtri(np.asarray(p, dtype=np.float64)))


def normal_pdf(x: npt.ArrayLike) -> ArrayOrFloat:
    return as_output(np.asarray(stats.norm.pdf(np.asarray(x, dtype=np.float64)), dtype=np.float64))


def normal_log_cdf(x: npt.ArrayLike) -> ArrayOrFloat:
    """
    log Phi(x), accurate far into the lower tail where Phi(x) underflows.
    """
    return as_output(special.log_ndtr(np.asarray(x, dtype=np.float64)))


def normal_log_pdf(x: npt.ArrayLike) -> ArrayOrFloat:
    return as_output(np.asarray(stats.norm.logpdf(np.asarray(x, dtype=np.float64)), dtype=np.float64))


def student_t_cdf(t: npt.ArrayLike, df: float) -> ArrayOrFloat:
    """
    Student-t cumulative distribution function with `df` degrees of freedom,
    computed from the regularized incomplete beta function:

        P(T <= t) = 1/2 I_{df/(df+t^2)}(df/2, 1/2)      for t <= 0
        P(T <= t) = 1 - 1/2 I_{df/(df+t^2)}(df/2, 1/2)  for t > 0

    Args:
        t (array_like): Points at which to evaluate the CDF.
        df (float): Degrees of freedom, strictly positive.

    Returns:
        float or ndarray: CDF values in [0, 1].
    """
    t = np.asarray(t, dtype=np.float64)
    x = df / (df + t * t)
    tail = 0.5 * special.betainc(0.5 * df, 0.5, x)
    return as_output(np.where(t <= 0.0, tail, 1.0 - tail))


def student_t_quantile(p: npt.ArrayLike, df: float) -> ArrayOrFloat:
    """
    Inverse of `student_t_cdf`.
    """
    return as_output(special.stdtrit(df, np.asarray(p, dtype=np.float64)))


def ks_uniform_distance(values: npt.ArrayLike) -> float:
    """
    Kolmogorov-Smirnov distance between the empirical distribution of `values`
    and Uniform(0, 1).

    Example:
        >>> ks_uniform_distance([0.5])
        0.5
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    return float(stats.kstest(values, "uniform").statistic)


def clamp_probability(p: npt.ArrayLike, epsilon: float) -> ArrayOrFloat:
    """
    Keeps probabilities within [epsilon, 1 - epsilon] so that pivot transforms stay finite.

    Example:
        >>> clamp_probability(0.0, 1e-15)
        1e-15
    """
    return as_output(np.clip(np.asarray(p, dtype=np.float64), epsilon, 1.0 - epsilon))
