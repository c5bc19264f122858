"""Volatility models for high-frequency integer price changes.

Continuous GARCH/score-driven baselines, the interval maximum-likelihood
correction for integer data, and Skellam-family competitors, with a tick
data pipeline, diagnostics and a batch CLI.
"""

__version__ = "0.1.0"
