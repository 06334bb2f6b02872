"""Exception types shared across the package."""

from __future__ import annotations


class MocompError(Exception):
    """Base class for every error raised by this package."""


class EmptyRangeError(MocompError):
    """A time interval maps to zero frames after rounding/clamping."""


class OutOfBoundsError(MocompError):
    """A frame range falls outside the motion it indexes."""


class SkeletonMismatchError(MocompError):
    """Motion feature width is inconsistent with the configured skeleton."""


class UnknownTemplateError(MocompError):
    """An action spec references a kinematic template id that does not exist."""


class ConfigError(MocompError):
    """A corpus or run configuration violates its preconditions."""


class BadScheduleError(MocompError):
    """Noise schedule construction parameters are invalid."""


class DivergedError(MocompError):
    """Training produced a non-finite loss."""


class CheckpointError(MocompError):
    """A checkpoint file is missing, corrupt, or incompatible."""


class UnknownActionError(MocompError):
    """The rule-based decomposer has no entry for the input annotation."""


class TransportError(MocompError):
    """The LLM endpoint could not be reached or timed out."""


class MalformedResponseError(MocompError):
    """The LLM response is not parseable into the expected JSON schema."""


class ValidationExhaustedError(MocompError):
    """All decomposition retries were spent; carries the last violation list."""

    def __init__(self, message: str, violations: list | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class TooShortError(MocompError):
    """Motion has fewer frames than the operation requires."""


class DegenerateCovarianceError(MocompError):
    """Covariance cleanup discarded too much variance to trust the result."""


class GalleryError(MocompError):
    """Retrieval gallery is too small or contains duplicate texts."""


class LengthMismatchError(MocompError):
    """Paired evaluation inputs have different lengths."""
