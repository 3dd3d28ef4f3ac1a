"""
파일명: src/common/logger.py
목적: 시뮬레이션 라이브러리/CLI 공용 로깅 프레임워크
설명:
  - .env + config/logging.yml 기반 dictConfig 설정
  - YAML 전역(키/값) 환경변수 치환: ${PROJECT_NAME}, ${LOG_PATH}
  - LOG_PATH 미설정 시 파일 핸들러 제외(콘솔 전용), 설정 시 경로/권한 검증(자동 생성 금지)
  - LOG_LEVEL로 root/서브 로거 레벨 일괄 오버라이드
  - provenance 로거의 stdout 출력 금지 보장(정책 위반 시 예외)
  - get_logger, log_info 등 래퍼 및 run_record(실행 이력 JSON) 제공
변경이력:
  - 2026-10-19: 시뮬레이션용으로 재구성, audit → provenance 로거 전환
"""

import json
import os
import re
import socket
import logging
import logging.config
from pathlib import Path
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

load_dotenv(override=False)

PROJECT_NAME = os.getenv("PROJECT_NAME", "chiralenv")
VALID_LEVELS = {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}
LOGGING_YML = Path(__file__).parent.parent.parent / "config" / "logging.yml"
PROVENANCE_LOGGER = "provenance"


def _get_log_level() -> str:
    """ENV LOG_LEVEL을 대문자로 읽어 유효성 검사 후 반환."""
    level = os.getenv("LOG_LEVEL", "INFO").upper()
    return level if level in VALID_LEVELS else "INFO"


def _expand_env_placeholders(value: Any) -> Any:
    """문자열 내 ${PROJECT_NAME}/${LOG_PATH} 및 기타 $VAR 치환."""
    if not isinstance(value, str):
        return value
    value = value.replace("${PROJECT_NAME}", PROJECT_NAME)
    log_path = os.getenv("LOG_PATH", "")
    value = value.replace("${LOG_PATH}", log_path)
    return os.path.expandvars(value)


def _expand_env_any(obj: Any) -> Any:
    """YAML 전체(키/값, 리스트 요소)에 대해 환경변수 치환을 재귀 수행."""
    if isinstance(obj, dict):
        return {_expand_env_any(k): _expand_env_any(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_expand_env_any(x) for x in obj]
    return _expand_env_placeholders(obj)


def _require_parent_exists_and_writable(path: Path, handler_name: str) -> None:
    """로그 디렉토리는 자동 생성하지 않는다. 존재/쓰기권한이 없으면 예외."""
    parent = path.parent
    if not parent.exists():
        raise FileNotFoundError(
            f"[{handler_name}] 로그 디렉토리가 존재하지 않습니다: {parent}\n"
            "- .env의 LOG_PATH 설정을 확인하세요."
        )
    if not os.access(parent, os.W_OK):
        raise PermissionError(f"[{handler_name}] 로그 디렉토리에 쓰기 권한이 없습니다: {parent}")


def _drop_file_handlers(config: dict) -> None:
    """LOG_PATH가 없으면 파일 핸들러를 구성에서 제거(콘솔 전용 모드)."""
    handlers = config.get("handlers", {})
    file_handlers = {
        name for name, cfg in handlers.items()
        if re.search(r"FileHandler$", cfg.get("class", ""))
    }
    for name in file_handlers:
        handlers.pop(name)
    for section in [config.get("root", {})] + list(config.get("loggers", {}).values()):
        if "handlers" in section:
            section["handlers"] = [h for h in section["handlers"] if h not in file_handlers]


def _ensure_project_logger(config: dict, level: str) -> None:
    """${PROJECT_NAME} 로거가 YAML에 없더라도 루트로 전파되도록 보장."""
    loggers = config.setdefault("loggers", {})
    if PROJECT_NAME not in loggers:
        loggers[PROJECT_NAME] = {"level": level, "propagate": True}


def _assert_provenance_is_file_only(config: dict) -> None:
    """provenance 로거는 콘솔에 기록하지 않는다. 위반 구성이면 예외."""
    provenance = config.get("loggers", {}).get(PROVENANCE_LOGGER)
    if not provenance:
        return
    if "console" in set(provenance.get("handlers", [])):
        raise RuntimeError("정책 위반: 'provenance' 로거에 console 핸들러를 사용할 수 없습니다.")
    if provenance.get("propagate", False):
        raise RuntimeError("정책 위반: 'provenance' 로거는 propagate: false 여야 합니다.")


def _load_logging_config(yaml_path: Path = LOGGING_YML) -> dict:
    """
    config/logging.yml을 로드하여 dictConfig용 딕셔너리를 반환.
      - YAML 전역 ENV 치환
      - LOG_LEVEL 일괄 오버라이드
      - LOG_PATH 유무에 따라 파일 핸들러 검증 또는 제거
      - 프로젝트 로거 보장, provenance 정책 점검
    """
    if not yaml_path.exists():
        raise FileNotFoundError(f"logging.yml 파일이 필요합니다: {yaml_path}")

    with open(yaml_path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)

    # 정책 점검은 치환/핸들러 정리 전에 수행 (원본 구성 기준)
    _assert_provenance_is_file_only(config)

    config = _expand_env_any(config)

    level = _get_log_level()
    config.setdefault("root", {})["level"] = level
    for _, logger_cfg in config.get("loggers", {}).items():
        logger_cfg["level"] = level

    _ensure_project_logger(config, level)

    if not os.getenv("LOG_PATH"):
        _drop_file_handlers(config)
    else:
        for handler_name, handler_cfg in config.get("handlers", {}).items():
            if re.search(r"FileHandler$", handler_cfg.get("class", "")):
                raw_filename = handler_cfg.get("filename", "")
                if not raw_filename:
                    raise ValueError(f"[{handler_name}] filename이 지정되어 있지 않습니다.")
                file_path = Path(_expand_env_placeholders(raw_filename))
                _require_parent_exists_and_writable(file_path, handler_name)
                handler_cfg["filename"] = str(file_path)

    return config


def setup_logging() -> None:
    """dictConfig로 로깅을 초기화."""
    logging.config.dictConfig(_load_logging_config())


def get_logger(name: Optional[str] = PROJECT_NAME) -> logging.Logger:
    """지정된 이름의 로거 반환. 최초 호출 시 setup_logging() 수행."""
    root_logger = logging.getLogger()
    if not root_logger.hasHandlers():
        setup_logging()
    return logging.getLogger(name or None)


def run_record(action: str, detail: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    실행 이력(JSON) 기록. 'provenance' 로거는 파일 전용이다(stdout 금지).
    기록한 딕셔너리를 반환한다.
    """
    record = {
        "action": action,
        "user": os.getenv("USER") or os.getenv("USERNAME") or "unknown",
        "process_id": os.getpid(),
        "host": socket.gethostname(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if detail:
        record.update(detail)
    get_logger(PROVENANCE_LOGGER).info(json.dumps(record, sort_keys=True, default=str))
    return record


def log_debug(msg: str) -> None:
    get_logger().debug(msg)

def log_info(msg: str) -> None:
    get_logger().info(msg)

def log_warn(msg: str) -> None:
    get_logger().warning(msg)

def log_error(msg: str) -> None:
    get_logger().error(msg)

def log_critical(msg: str) -> None:
    get_logger().critical(msg)
