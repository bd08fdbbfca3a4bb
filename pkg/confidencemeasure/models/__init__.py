from .models import *  # noqa: F403

"""
Models module for confidencemeasure library.

Module Overview:

This module builds significance curves for normal sampling models and
simulates data from them.

Key Functions:

-   `sf_normal_known_sigma` builds the known-sd normal curve.
-   `sf_student_t` and `sf_student_t_summary` build the Student-t curve.
-   `sf_normal_direct` wraps a subjective normal opinion.
-   `simulate_sample` draws a reproducible sample from a `NormalModelSpec`.
-   `likelihood_product_mode` returns the mode of a product of normal likelihoods.
"""
