from .validators import *  # noqa: F403

"""
Collections module for confidencemeasure library.

Module Overview:

This module provides descriptor based validators used by the configuration
objects of the library.

Key Classes:

-   `Number` validates finite, optionally bounded real numbers.
-   `Integer` validates bounded integers.
"""
