from .game import *  # noqa: F403

"""
Game module for confidencemeasure library.

Module Overview:

This module simulates the betting game in which a statistician posts odds
lambda(B) / (1 - lambda(B)) on set estimates F_x^{-1}(B) and a client may take
either side. It estimates coverage rates, fair odds, expected losses and the
arbitrary-hypothesis risk of an estimator.

Key Classes:

-   `EstimatorSpec` maps a sample to a significance curve, calibrated or not.
-   `GameConfig` holds the sampling model, the index suite and the Monte Carlo settings.
-   `GameReport` collects the per-index records and the maximum risk.

Usage Guide:

1. Describe the model with `NormalModelSpec` and wrap it in a `GameConfig`.
2. Call `play(EstimatorSpec.calibrated(), cfg)` and inspect `report.max_risk`.
3. Results depend only on the seed, never on `workers`.
"""
