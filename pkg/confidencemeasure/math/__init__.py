from .math import *  # noqa: F403

"""
Math module for confidencemeasure library.

Module Overview:

This module provides the special functions used to build significance curves.

Key Functions:

-   `normal_cdf`, `normal_quantile`, `normal_pdf` and their log forms for the standard normal distribution.
-   `student_t_cdf` (regularized incomplete beta) and `student_t_quantile`.
-   `ks_uniform_distance` gives the Kolmogorov-Smirnov distance to Uniform(0, 1).
-   `clamp_probability` keeps probabilities away from 0 and 1.
"""
