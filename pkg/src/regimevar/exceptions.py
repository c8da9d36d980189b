"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: config/data problems are validation
failures (exit 1), estimation problems are numerical failures (exit 2),
everything filesystem-related stays OSError (exit 3).
"""


class ConfigError(ValueError):
    """Invalid or incomplete pipeline configuration."""


class DataError(ValueError):
    """Malformed input data or a transform contract violation."""


class EstimationError(RuntimeError):
    """Numerical failure inside a test or estimator."""
