"""
파일명: src/common/load_config.py
목적: YAML 설정 파일 로드 및 환경변수 치환
기능:
  - YAML 설정 파일을 읽고 ${VAR}, ${VAR:-default}를 실제 값으로 치환
  - 섹션 지정 시 해당 섹션만 반환, 미지정 시 전체 설정 반환
  - 빈 파일은 빈 딕셔너리, 최상위가 매핑이 아니면 ValueError
변경이력:
  - 2026-10-19: 실행 설정(run config) 로더로 재사용, 최상위 타입 검사 추가
"""

from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from common.logger import log_debug, log_error
from common.substitute import substitute_env


def load_config(yml_path: Union[str, Path], section: Optional[str] = None) -> Dict[str, Any]:
    """
    YAML 설정 파일을 로드하고 환경변수를 치환하여 반환

    Args:
        yml_path: YAML 파일 경로
        section: 특정 섹션만 추출. None이면 전체 반환

    Raises:
        FileNotFoundError: 설정 파일이 존재하지 않을 때
        yaml.YAMLError: YAML 파싱 오류 발생 시
        ValueError: 최상위 구조가 매핑이 아닐 때
    """
    try:
        log_debug(f"[load_config] Loading config from: {yml_path}, section: {section}")

        with open(yml_path, encoding="utf-8") as f:
            yaml_config = yaml.safe_load(f) or {}

        if not isinstance(yaml_config, dict):
            raise ValueError(f"{yml_path}: 최상위 구조는 매핑이어야 합니다 (got {type(yaml_config).__name__})")

        substituted_config = substitute_env(yaml_config)

        if section:
            result = substituted_config.get(section, {})
            log_debug(f"[load_config] Extracted section '{section}' with {len(result)} keys")
            return result

        log_debug(f"[load_config] Returning full config with {len(substituted_config)} top-level keys")
        return substituted_config

    except FileNotFoundError:
        log_error(f"[load_config] Config file not found: {yml_path}")
        raise
    except yaml.YAMLError as e:
        log_error(f"[load_config] YAML parsing error in {yml_path}: {e}")
        raise
