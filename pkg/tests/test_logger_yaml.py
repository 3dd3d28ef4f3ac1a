"""
파일명: tests/test_logger_yaml.py
목적: config/logging.yml 로딩 정책과 실행 이력(run_record) 검증
변경이력:
  - 2026-10-19: provenance 정책, LOG_PATH 처리 테스트 추가
"""

import copy
import logging

import pytest
import yaml

from common.logger import (
    LOGGING_YML,
    PROVENANCE_LOGGER,
    _assert_provenance_is_file_only,
    _load_logging_config,
    get_logger,
    run_record,
)


def _raw_config() -> dict:
    return yaml.safe_load(LOGGING_YML.read_text(encoding="utf-8"))


def test_logger_yaml():
    logger = get_logger()
    assert isinstance(logger, logging.Logger)
    logger.info("logging.yml 테스트 로그")


def test_console_only_without_log_path():
    config = _load_logging_config()
    classes = {h["class"] for h in config["handlers"].values()}
    assert classes == {"logging.StreamHandler"}
    assert config["root"]["handlers"] == ["console"]
    assert config["loggers"][PROVENANCE_LOGGER]["handlers"] == []


def test_log_level_override(monkeypatch):
    monkeypatch.setenv("LOG_LEVEL", "debug")
    config = _load_logging_config()
    assert config["root"]["level"] == "DEBUG"
    assert all(cfg["level"] == "DEBUG" for cfg in config["loggers"].values())


def test_log_path_must_exist(monkeypatch, tmp_path):
    monkeypatch.setenv("LOG_PATH", str(tmp_path / "missing"))
    with pytest.raises(FileNotFoundError):
        _load_logging_config()


def test_log_path_files(monkeypatch, tmp_path):
    monkeypatch.setenv("LOG_PATH", str(tmp_path))
    config = _load_logging_config()
    assert config["handlers"]["provenance_file"]["filename"] == str(tmp_path / "provenance.jsonl")


def test_provenance_policy_rejects_console():
    config = _raw_config()
    config["loggers"][PROVENANCE_LOGGER]["handlers"].append("console")
    with pytest.raises(RuntimeError):
        _assert_provenance_is_file_only(config)


def test_provenance_policy_rejects_propagation():
    config = copy.deepcopy(_raw_config())
    config["loggers"][PROVENANCE_LOGGER]["propagate"] = True
    with pytest.raises(RuntimeError):
        _assert_provenance_is_file_only(config)


def test_run_record_fields():
    record = run_record("ensemble", {"config_hash": "abc", "master_seed": 7})
    assert record["action"] == "ensemble"
    assert record["config_hash"] == "abc"
    assert record["master_seed"] == 7
    for key in ("user", "process_id", "host", "timestamp"):
        assert key in record
