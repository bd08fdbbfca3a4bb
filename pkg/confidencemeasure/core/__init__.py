from .core import *  # noqa: F403

"""
Core module for confidencemeasure library.

Module Overview:

This module represents significance functions as monotone curves and extracts
p-values, intervals and set probabilities from them.

Key Classes:

-   `ParameterGrid` holds the parameter values at which a curve is known.
-   `SignificanceCurve` holds F_x, and by extension the confidence measure P^x.
-   `IntervalUnion` is a finite union of disjoint parameter intervals.
-   `SetIndex` is a finite union of disjoint subintervals of [0, 1] with its level.
"""
