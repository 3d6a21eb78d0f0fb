"""Tests for error codes and custom exceptions."""

import pytest
from reasonforge.errors import (
    ErrorCode, ERROR_DESCRIPTIONS, exit_code_for,
    ReasonForgeError, ConfigError, SceneError, QAError, CurriculumError,
    EvalError, DatasetError, StorageError, MatcherError,
)


def test_error_codes_are_strings():
    """All error codes are valid enum members with string values."""
    assert ErrorCode.CONFIG_FILE_NOT_FOUND.value == "CONFIG_FILE_NOT_FOUND"
    assert ErrorCode.SCENE_PLACEMENT_EXHAUSTED.value == "SCENE_PLACEMENT_EXHAUSTED"
    assert ErrorCode.QA_VALIDATION_FAILURE.value == "QA_VALIDATION_FAILURE"
    assert ErrorCode.MATCHER_TIMEOUT.value == "MATCHER_TIMEOUT"


def test_all_codes_have_description():
    """Every error code has a description in ERROR_DESCRIPTIONS."""
    for code in ErrorCode:
        assert code in ERROR_DESCRIPTIONS
        assert isinstance(ERROR_DESCRIPTIONS[code], str)
        assert len(ERROR_DESCRIPTIONS[code]) > 0


def test_error_carries_code_and_default_message():
    """Errors without a message fall back to the code description."""
    err = SceneError(ErrorCode.SCENE_PLACEMENT_EXHAUSTED)
    assert err.code == ErrorCode.SCENE_PLACEMENT_EXHAUSTED
    assert err.message == ERROR_DESCRIPTIONS[ErrorCode.SCENE_PLACEMENT_EXHAUSTED]


def test_str_includes_code():
    """String form is "[CODE] message"."""
    err = QAError(ErrorCode.QA_VALIDATION_FAILURE, "options not distinct")
    assert str(err) == "[QA_VALIDATION_FAILURE] options not distinct"


def test_subclasses_share_base():
    for cls in (ConfigError, SceneError, QAError, CurriculumError, EvalError, DatasetError, StorageError, MatcherError):
        assert issubclass(cls, ReasonForgeError)


@pytest.mark.parametrize("error,expected", [
    (ConfigError(ErrorCode.CONFIG_INVALID_VALUE), 1),
    (CurriculumError(ErrorCode.CURRICULUM_EMPTY_POOL), 1),
    (DatasetError(ErrorCode.DATASET_MANIFEST_MISMATCH), 1),
    (StorageError(ErrorCode.IO_WRITE_FAILED), 2),
    (MatcherError(ErrorCode.MATCHER_HTTP_ERROR), 3),
    (FileNotFoundError("x"), 2),
    (ValueError("x"), 1),
])
def test_exit_code_classes(error, expected):
    """Validation -> 1, I/O -> 2, external service -> 3."""
    assert exit_code_for(error) == expected
