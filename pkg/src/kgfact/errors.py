"""Exception types shared across the harness."""

from __future__ import annotations


class KgfactError(Exception):
    """Base class for all harness errors."""


class ConfigError(KgfactError):
    """Invalid or incomplete run configuration (CLI exit code 2)."""


class TableValidationError(ConfigError):
    """A type/relation table row failed validation.

    Carries the source file and 1-based line number of the offending row.
    """

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.message = message


# --- kg-access ---------------------------------------------------------


class EndpointUnavailable(KgfactError):
    """Transport failure that persisted through all retries."""


class MalformedResponse(KgfactError):
    """The endpoint answered but the payload is unusable."""


class EntityNotFound(KgfactError):
    pass


class DescriptionMissing(KgfactError):
    pass


# --- question generation ------------------------------------------------


class MissingBirthDate(KgfactError):
    """Human entity has no birth-date triple; rejected upstream."""


class TemplateFieldMissing(KgfactError):
    pass


# --- difficulty model ---------------------------------------------------


class CalibrationMissing(KgfactError):
    """No calibration bounds loaded for min-max scaling."""


class UnknownType(KgfactError):
    """Type has no relation-weight set."""


class InsufficientData(KgfactError):
    """Calibration input lacks the observations it needs."""


# --- model backends -----------------------------------------------------


class BackendError(KgfactError):
    pass


class BackendTimeout(BackendError):
    pass


class BackendRejected(BackendError):
    """HTTP 4xx from a backend; the response body is preserved."""

    def __init__(self, status: int, body: str):
        super().__init__(f"backend rejected request (HTTP {status}): {body}")
        self.status = status
        self.body = body


class EmptyCompletion(BackendError):
    pass


class DimensionMismatch(BackendError):
    pass


class LabelUnknown(BackendError):
    """NLI backend emitted a label outside the three-way set."""


class UnparseableLabel(BackendError):
    """A judge reply could not be mapped to any expected label."""


# --- verification -------------------------------------------------------


class InconsistentInput(KgfactError):
    """Fact verdicts present/absent in disagreement with the entity verdict."""


# --- metrics ------------------------------------------------------------


class EmptyRun(KgfactError):
    pass


class MissingCalibration(KgfactError):
    pass


class AllAbstained(KgfactError):
    """Breadth hallucination rate is undefined: every response abstained."""


class NoAlignedResponses(KgfactError):
    """Depth hallucination rate is undefined: nothing was fact-checked."""


class DegenerateInput(KgfactError):
    """Rank correlation of a constant series is undefined."""


# --- harness ------------------------------------------------------------


class FatalBackendOutage(KgfactError):
    """The question budget cannot be completed (CLI exit code 3)."""

    def __init__(self, message: str, resume_token: str | None = None):
        super().__init__(message)
        self.resume_token = resume_token


class SchemaMismatch(KgfactError):
    """A run-log line failed to parse (CLI exit code 4)."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
        self.message = message
