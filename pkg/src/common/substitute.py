"""
파일명: src/common/substitute.py
기능:
  - 환경변수 치환: ${VAR} → os.environ['VAR'], ${VAR:-default} → 미정의 시 default
  - 치환 결과가 숫자/불리언 리터럴이면 YAML 규칙으로 다시 해석 (예: ${SEED:-42} → 42)
전제조건:
  - 미정의이면서 기본값이 없는 변수는 원문(${VAR}) 그대로 남긴다
변경이력:
  - 2026-10-19: 기본값 문법 및 스칼라 재해석 추가
"""

import os
import re

import yaml

_PLACEHOLDER = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}")


def _replace(match: re.Match) -> str:
    name, default = match.group(1), match.group(2)
    if name in os.environ:
        return os.environ[name]
    if default is not None:
        return default
    return match.group(0)


def substitute_env(value):
    """
    재귀적으로 환경변수 치환을 수행한다.

    - str: ${VAR}/${VAR:-default} 치환. 문자열 전체가 하나의 placeholder였다면
      치환 결과를 yaml.safe_load로 다시 읽어 int/float/bool을 복원한다.
    - dict/list: 원소마다 재귀 호출 (원본은 변경하지 않음)
    - 기타 타입: 그대로 반환
    """
    if isinstance(value, str):
        substituted = _PLACEHOLDER.sub(_replace, value)
        if substituted != value and _PLACEHOLDER.fullmatch(value):
            try:
                parsed = yaml.safe_load(substituted)
            except yaml.YAMLError:
                return substituted
            if isinstance(parsed, (bool, int, float)):
                return parsed
        return substituted

    if isinstance(value, dict):
        return {key: substitute_env(val) for key, val in value.items()}

    if isinstance(value, list):
        return [substitute_env(v) for v in value]

    return value
