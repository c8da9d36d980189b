"""Regime-switching VAR toolkit for annual fiscal/household panels.

Pipeline stages: CSV ingestion and transforms, unit-root and cointegration
pre-tests, household consumption indicators, K-regime Markov-switching VAR
estimation (Hamilton filter / Kim smoother / EM), and post-estimation
analytics (regime dating, impulse responses, variance decomposition).
"""

__version__ = "0.1.0"

from regimevar.exceptions import ConfigError, DataError, EstimationError

__all__ = ["ConfigError", "DataError", "EstimationError", "__version__"]
