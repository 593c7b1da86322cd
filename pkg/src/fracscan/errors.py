"""Exception types shared across the toolkit."""


class FracscanError(Exception):
    """Base class for all toolkit errors."""


class InvalidImageError(FracscanError):
    """Raised when an input image is empty or malformed."""


class DegenerateImageError(FracscanError):
    """Raised when processing reduces an image to nothing (e.g. crop removed every row)."""


class ConfigError(FracscanError):
    """Raised for invalid configuration values."""


class ContourTooSmallError(FracscanError):
    """Raised when a contour has too few points for the requested operation."""


class ContractViolationError(FracscanError):
    """Raised when data violates a structural precondition (e.g. non-adjacent contour points)."""


class InvalidSelectionError(FracscanError):
    """Raised when a selection rectangle falls outside the image."""


class InsufficientDataError(FracscanError):
    """Raised when an analysis or split is asked for more data than is available."""


class UnfittedNormalizerError(FracscanError):
    """Raised when feature vectors are requested before normalization statistics exist."""


class DivergenceError(FracscanError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class UndefinedMetricError(FracscanError):
    """Raised when a metric (e.g. AUC) is undefined for the given inputs."""


class MissingArtifactError(FracscanError):
    """Raised when a pipeline stage needs an artifact that has not been produced yet."""

    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        super().__init__(f"missing artifact from stage '{stage}'" + (f": {detail}" if detail else ""))
