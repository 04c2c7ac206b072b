"""Exception types raised across the pipeline."""


class MediaOpinionError(Exception):
    """Base class for all package errors."""


class DataError(MediaOpinionError, ValueError):
    """Input data violates a precondition."""


class DuplicateIdError(DataError):
    pass


class MissingScoreError(DataError):
    pass


class DegenerateLabelsError(DataError):
    pass


class EmptyYearError(DataError):
    pass


class UnderdeterminedError(DataError):
    pass


class DisconnectedSurveyError(DataError):
    pass


class InvertedSeriesError(DataError):
    pass


class ConfigError(MediaOpinionError, ValueError):
    """Run configuration is invalid. ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class MissingArtifactError(MediaOpinionError, FileNotFoundError):
    """An upstream pipeline artifact is absent."""

    def __init__(self, artifact):
        super().__init__(f"missing upstream artifact: {artifact}")
        self.artifact = artifact


class InvariantError(MediaOpinionError, AssertionError):
    """An internal consistency check failed."""
