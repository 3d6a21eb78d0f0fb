"""
Error codes and custom exceptions for reasonforge.

Every failure the pipeline can report carries a predefined code from the
ErrorCode enum, so the CLI can map failures to exit codes and tests can
assert on the code instead of on message text.

Exit-code classes:
    1 - validation / contract violations (bad config, bad data, bad input)
    2 - I/O failures (unreadable or unwritable files)
    3 - external matching service failures
"""

from enum import Enum
from typing import Optional


class ErrorCode(Enum):
    """Predefined error codes for structured error handling."""

    # Configuration errors
    CONFIG_FILE_NOT_FOUND = "CONFIG_FILE_NOT_FOUND"
    CONFIG_INVALID_JSON = "CONFIG_INVALID_JSON"
    CONFIG_VERSION_MISMATCH = "CONFIG_VERSION_MISMATCH"
    CONFIG_INVALID_VALUE = "CONFIG_INVALID_VALUE"

    # Scene construction
    SCENE_SPEC_INVALID = "SCENE_SPEC_INVALID"
    SCENE_PLACEMENT_EXHAUSTED = "SCENE_PLACEMENT_EXHAUSTED"
    SCENE_INVALID = "SCENE_INVALID"

    # Rendering
    RENDER_DEGENERATE_WINDOW = "RENDER_DEGENERATE_WINDOW"
    RENDER_INVALID_IMAGE = "RENDER_INVALID_IMAGE"
    RENDER_UNSUPPORTED_FORMAT = "RENDER_UNSUPPORTED_FORMAT"

    # Task generation
    TASK_SPEC_INVALID = "TASK_SPEC_INVALID"
    TASK_NO_RELATION_AVAILABLE = "TASK_NO_RELATION_AVAILABLE"

    # Question / annotation construction
    QA_TEMPLATE_NOT_FOUND = "QA_TEMPLATE_NOT_FOUND"
    QA_TEMPLATE_INCOMPATIBLE = "QA_TEMPLATE_INCOMPATIBLE"
    QA_DISTRACTOR_COLLISION = "QA_DISTRACTOR_COLLISION"
    QA_VALIDATION_FAILURE = "QA_VALIDATION_FAILURE"

    # Curriculum
    CURRICULUM_DUPLICATE_QUESTION_ID = "CURRICULUM_DUPLICATE_QUESTION_ID"
    CURRICULUM_MISSING_STEP = "CURRICULUM_MISSING_STEP"
    CURRICULUM_EMPTY_POOL = "CURRICULUM_EMPTY_POOL"
    CURRICULUM_UNCOVERED_INSTANCE = "CURRICULUM_UNCOVERED_INSTANCE"
    CURRICULUM_INVALID_STAGE = "CURRICULUM_INVALID_STAGE"
    CURRICULUM_INVALID_LOG = "CURRICULUM_INVALID_LOG"
    CURRICULUM_INVALID_FRACTION = "CURRICULUM_INVALID_FRACTION"

    # Evaluation
    EVAL_UNKNOWN_QUESTION_ID = "EVAL_UNKNOWN_QUESTION_ID"
    EVAL_DUPLICATE_PREDICTION = "EVAL_DUPLICATE_PREDICTION"
    EVAL_INVALID_PREDICTION = "EVAL_INVALID_PREDICTION"

    # External matcher
    MATCHER_NOT_CONFIGURED = "MATCHER_NOT_CONFIGURED"
    MATCHER_TIMEOUT = "MATCHER_TIMEOUT"
    MATCHER_HTTP_ERROR = "MATCHER_HTTP_ERROR"
    MATCHER_MALFORMED_RESPONSE = "MATCHER_MALFORMED_RESPONSE"

    # Dataset directory
    DATASET_MANIFEST_MISMATCH = "DATASET_MANIFEST_MISMATCH"
    DATASET_INVALID_RECORD = "DATASET_INVALID_RECORD"

    # File system
    IO_READ_FAILED = "IO_READ_FAILED"
    IO_WRITE_FAILED = "IO_WRITE_FAILED"


ERROR_DESCRIPTIONS = {
    # Configuration
    ErrorCode.CONFIG_FILE_NOT_FOUND: "Configuration file not found",
    ErrorCode.CONFIG_INVALID_JSON: "Configuration file contains invalid JSON",
    ErrorCode.CONFIG_VERSION_MISMATCH: "Configuration version not supported",
    ErrorCode.CONFIG_INVALID_VALUE: "Configuration field has invalid value",

    # Scene
    ErrorCode.SCENE_SPEC_INVALID: "Scene specification is invalid",
    ErrorCode.SCENE_PLACEMENT_EXHAUSTED: "Could not place all primitives within the attempt budget",
    ErrorCode.SCENE_INVALID: "Scene violates a structural invariant",

    # Render
    ErrorCode.RENDER_DEGENERATE_WINDOW: "World window has zero area",
    ErrorCode.RENDER_INVALID_IMAGE: "Raster image is malformed",
    ErrorCode.RENDER_UNSUPPORTED_FORMAT: "Unsupported image format",

    # Task generation
    ErrorCode.TASK_SPEC_INVALID: "Task specification is invalid",
    ErrorCode.TASK_NO_RELATION_AVAILABLE: "Scene yields no spatial relation to query",

    # QA
    ErrorCode.QA_TEMPLATE_NOT_FOUND: "Question template not found in catalog",
    ErrorCode.QA_TEMPLATE_INCOMPATIBLE: "Question template does not fit the task facts",
    ErrorCode.QA_DISTRACTOR_COLLISION: "Could not produce three distinct wrong options",
    ErrorCode.QA_VALIDATION_FAILURE: "Instance failed validation",

    # Curriculum
    ErrorCode.CURRICULUM_DUPLICATE_QUESTION_ID: "Question id appears more than once",
    ErrorCode.CURRICULUM_MISSING_STEP: "Instance is missing a reasoning step",
    ErrorCode.CURRICULUM_EMPTY_POOL: "Sampling pool is empty",
    ErrorCode.CURRICULUM_UNCOVERED_INSTANCE: "Instance has no difficulty record",
    ErrorCode.CURRICULUM_INVALID_STAGE: "Stage index out of range",
    ErrorCode.CURRICULUM_INVALID_LOG: "Trial log row is malformed",
    ErrorCode.CURRICULUM_INVALID_FRACTION: "Sampling fraction must lie in (0, 1]",

    # Evaluation
    ErrorCode.EVAL_UNKNOWN_QUESTION_ID: "Prediction refers to an unknown question id",
    ErrorCode.EVAL_DUPLICATE_PREDICTION: "More than one prediction for a question",
    ErrorCode.EVAL_INVALID_PREDICTION: "Prediction row is malformed",

    # Matcher
    ErrorCode.MATCHER_NOT_CONFIGURED: "External matcher endpoint not configured",
    ErrorCode.MATCHER_TIMEOUT: "External matcher request timed out",
    ErrorCode.MATCHER_HTTP_ERROR: "External matcher returned an HTTP error",
    ErrorCode.MATCHER_MALFORMED_RESPONSE: "External matcher response format invalid",

    # Dataset
    ErrorCode.DATASET_MANIFEST_MISMATCH: "Dataset contents disagree with manifest",
    ErrorCode.DATASET_INVALID_RECORD: "Dataset record is malformed",

    # File system
    ErrorCode.IO_READ_FAILED: "Failed to read file",
    ErrorCode.IO_WRITE_FAILED: "Failed to write file",
}


class ReasonForgeError(Exception):
    """Base exception class for all reasonforge errors."""

    exit_code = 1

    def __init__(self, code: ErrorCode, message: Optional[str] = None):
        self.code = code
        self.message = message or ERROR_DESCRIPTIONS.get(code, str(code.value))
        super().__init__(self.message)

    def __str__(self) -> str:
        return f"[{self.code.value}] {self.message}"


class ConfigError(ReasonForgeError):
    """Configuration file or validation errors."""
    pass


class SceneError(ReasonForgeError):
    """Scene specification or placement errors."""
    pass


class RenderError(ReasonForgeError):
    """Projection or rasterization errors."""
    pass


class TaskError(ReasonForgeError):
    """Task fact generation errors."""
    pass


class QAError(ReasonForgeError):
    """MCQ, annotation or instance assembly errors."""
    pass


class CurriculumError(ReasonForgeError):
    """Difficulty filter and stage construction errors."""
    pass


class EvalError(ReasonForgeError):
    """Scoring errors."""
    pass


class DatasetError(ReasonForgeError):
    """Dataset directory and manifest errors."""
    pass


class StorageError(ReasonForgeError):
    """File read/write errors."""

    exit_code = 2


class MatcherError(ReasonForgeError):
    """External matching service errors."""

    exit_code = 3


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(error, ReasonForgeError):
        return error.exit_code
    if isinstance(error, OSError):
        return 2
    return 1
