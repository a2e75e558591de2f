"""Exception hierarchy shared across the pipeline."""


class FlowforgeError(Exception):
    """Base class for data-level failures (CLI exit code 2)."""


class IncompatibleFramesError(FlowforgeError, ValueError):
    pass


class ConfigurationError(FlowforgeError, ValueError):
    pass


class InvalidFrameError(FlowforgeError, ValueError):
    pass


class InvalidFlowError(FlowforgeError, ValueError):
    pass


class NonFiniteFlowError(InvalidFlowError):
    def __init__(self, row, col):
        super().__init__(f"non-finite flow value at pixel (x={col}, y={row})")
        self.row = row
        self.col = col


class DegenerateConfigurationError(FlowforgeError, ValueError):
    """Point set cannot determine a unique homography."""


class NormalizationError(FlowforgeError, ValueError):
    """Homography bottom-right entry is too close to zero to normalize."""


class PointAtInfinityError(FlowforgeError, ValueError):
    pass


class InsufficientSamplesError(FlowforgeError, ValueError):
    pass


class NoValidModel(FlowforgeError):
    """RANSAC found no model passing the validity rule.

    This is an expected outcome for flow without a dominant global motion;
    callers fall back to the raw flow.
    """

    def __init__(self, inlier_count=0, reason="no valid model"):
        super().__init__(f"{reason} (best inlier count {inlier_count})")
        self.inlier_count = inlier_count
        self.reason = reason


class BatchItemError(FlowforgeError):
    def __init__(self, index, cause):
        super().__init__(f"batch item {index}: {cause}")
        self.index = index
        self.cause = cause


class FloFormatError(FlowforgeError, ValueError):
    pass


class FloLengthError(FloFormatError):
    def __init__(self, expected, actual):
        super().__init__(f"flow payload length mismatch: expected {expected} bytes, got {actual}")
        self.expected = expected
        self.actual = actual


class ImageDecodeError(FlowforgeError, ValueError):
    pass


class ManifestVersionError(FlowforgeError, ValueError):
    pass
