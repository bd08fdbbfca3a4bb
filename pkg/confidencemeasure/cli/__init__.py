"""
CLI module for confidencemeasure library.

Module Overview:

This module exposes the library on the command line. Evidence files are
JSON, curves are written as `theta,cdf` CSV and every report is JSON on
standard output.

Key Modules:

-   `cli` parses arguments, runs a command and maps failures to exit codes.
-   `evidence` reads evidence files and grouping expressions.
-   `worked_examples` reproduces the Torricelli and common-mean examples.
"""
