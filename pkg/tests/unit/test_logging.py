"""Tests for logging configuration and behavior."""

import logging

import pytest

from reasonforge.logging import ROOT_LOGGER, get_logger, log_duration, setup_logging


def _flush(logger):
    for h in logger.handlers:
        h.flush()


class TestSetupLogging:

    def test_returns_root_logger(self, tmp_path):
        logger = setup_logging(log_file=str(tmp_path / "test.log"))
        assert isinstance(logger, logging.Logger)
        assert logger.name == ROOT_LOGGER

    def test_writes_level_and_name(self, tmp_path):
        log_file = tmp_path / "test.log"
        logger = setup_logging(log_file=str(log_file), log_level="DEBUG")
        get_logger("scene").warning("Placement test")
        _flush(logger)
        content = log_file.read_text()
        assert "[WARNING]" in content
        assert "reasonforge.scene" in content
        assert "Placement test" in content

    def test_level_from_config(self, tmp_path, monkeypatch):
        monkeypatch.delenv("LOG_LEVEL", raising=False)
        logger = setup_logging(config={"logging": {"level": "ERROR"}}, log_file=str(tmp_path / "t.log"))
        assert logger.level == logging.ERROR

    def test_env_beats_config(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LOG_LEVEL", "DEBUG")
        logger = setup_logging(config={"logging": {"level": "ERROR"}}, log_file=str(tmp_path / "t.log"))
        assert logger.level == logging.DEBUG

    def test_empty_log_file_disables_file_handler(self):
        logger = setup_logging(log_file="")
        assert all(not isinstance(h, logging.FileHandler) for h in logger.handlers)

    def test_verbose_echoes_info(self, tmp_path):
        logger = setup_logging(log_file=str(tmp_path / "t.log"), verbose=True)
        console = [h for h in logger.handlers if not isinstance(h, logging.FileHandler)]
        assert console and console[0].level == logging.INFO

    def test_repeated_setup_does_not_duplicate_handlers(self, tmp_path):
        setup_logging(log_file=str(tmp_path / "t.log"))
        logger = setup_logging(log_file=str(tmp_path / "t.log"))
        assert len(logger.handlers) == 2


def test_child_loggers_share_root():
    assert get_logger("dataset").name == f"{ROOT_LOGGER}.dataset"
    assert get_logger().name == ROOT_LOGGER


def test_log_duration_records_elapsed(tmp_path):
    log_file = tmp_path / "t.log"
    logger = setup_logging(log_file=str(log_file), log_level="INFO")
    with log_duration(get_logger("dataset"), "generate"):
        pass
    _flush(logger)
    assert "generate took" in log_file.read_text()


def test_log_duration_logs_on_error(tmp_path):
    log_file = tmp_path / "t.log"
    logger = setup_logging(log_file=str(log_file), log_level="INFO")
    with pytest.raises(RuntimeError):
        with log_duration(get_logger("dataset"), "failing step"):
            raise RuntimeError("boom")
    _flush(logger)
    assert "failing step took" in log_file.read_text()
