from .combination import *  # noqa: F403

"""
Combination module for confidencemeasure library.

Module Overview:

This module combines independent significance curves by the
double-exponential rule and provides the Laplace distribution functions it
is built from.

Key Functions:

-   `de_cdf`, `de_pdf` and `de_quantile` for the standard Laplace distribution.
-   `v_polynomial` for the exact convolution polynomials V_L.
-   `de_l_cdf` and `de_l_pdf` for sums of L Laplace variables.
-   `combine` and `combine_tree` for flat and nested combination.
"""
