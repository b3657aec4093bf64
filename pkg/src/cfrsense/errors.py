"""Exception hierarchy shared by all pipeline stages."""


class CfrSenseError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CfrSenseError, ValueError):
    """Invalid configuration or parameter combination."""


class FrameFormatError(CfrSenseError, ValueError):
    """A time-domain frame has the wrong shape."""


class DemapAmbiguityError(CfrSenseError, ValueError):
    """A received sample sits exactly at the constellation origin."""


class ScenarioError(ConfigError):
    """Channel scenario violates its invariants."""


class EstimationError(CfrSenseError, ArithmeticError):
    """Channel estimate undefined (zero transmitted symbol)."""

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class FilterSpecError(ConfigError):
    """Filter parameters are inconsistent."""


class ModelError(CfrSenseError):
    """Classifier cannot be fit or used as requested."""


class DegenerateDataError(ModelError, ValueError):
    """Training data has fewer than two classes."""


class BoostingError(ModelError):
    """AdaBoost could not find a better-than-chance first learner."""


class DivergenceError(ModelError, ArithmeticError):
    """Neural-network training produced a non-finite loss."""

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class InputError(CfrSenseError, ValueError):
    """Feature vector dimension does not match the trained model."""


class MetricError(CfrSenseError, ValueError):
    """Metric undefined for the given counts."""


class SplitError(CfrSenseError, ValueError):
    """Cross-validation folds cannot be formed."""


class StratificationError(SplitError):
    """A training fold lacks one of the classes."""


class ParseError(CfrSenseError, ValueError):
    """Malformed file content; carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(CfrSenseError, ValueError):
    """Non-finite or otherwise invalid numeric data."""


class SchemaError(CfrSenseError, ValueError):
    """Manifest is missing a key or has the wrong structure."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class SchemaVersionError(SchemaError):
    """Manifest schema version is not supported."""


class HashMismatchError(CfrSenseError):
    """A file's content hash differs from the manifest."""

    def __init__(self, path):
        super().__init__(f"hash mismatch: {path}")
        self.path = path
