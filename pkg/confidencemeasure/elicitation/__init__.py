from .elicitation import *  # noqa: F403

"""
Elicitation module for confidencemeasure library.

Module Overview:

This module turns agent opinions into subjective significance curves.

Key Functions:

-   `sf_from_hypothetical_data` derives a curve from data the agent might have seen.
-   `sf_from_elicited_pvalues` and `sf_from_elicited_intervals` interpolate elicited
    p-values or central intervals, with exponential tails.
-   `sf_from_bayes_posterior` imports a posterior CDF, flagged approximate unless
    the prior is declared probability-matching.
-   `density_mode` finds the mode of a curve's finite difference density.
"""
