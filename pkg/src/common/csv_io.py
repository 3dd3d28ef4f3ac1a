"""
파일명: src/common/csv_io.py
목적: 결과 파일(CSV/JSON)과 플롯 스크립트 출력 담당
기능:
  - write_csv: 메타데이터 JSON 을 '# ' 주석 줄로 앞에 붙인 CSV 저장 (pandas)
  - read_csv_with_metadata: 위 형식을 다시 (DataFrame, metadata) 로 읽기
  - write_json: 정렬된 키의 JSON 요약 저장
  - render_template: templates/ 아래 string.Template 파일을 채워 저장
설명:
  - 숫자는 float_format="%.17g" 로 기록 (로케일 무관, 왕복 손실 없음), 줄바꿈은 항상 "\n"
  - 메타데이터에 시각/호스트 정보를 넣지 않는다. 같은 입력이면 바이트 단위로 같은 파일.
변경이력:
  - 2025-10-02: 최초 구현 (BenKorea)
  - 2026-10-19: 엑셀 입출력을 CSV/JSON 결과 파일 입출력으로 교체
"""

import io
import json
from pathlib import Path
from string import Template
from typing import Any, Dict, Tuple, Union

import pandas as pd

from common.logger import log_debug, log_error, log_info

PROJECT_ROOT = Path(__file__).resolve().parents[2]
TEMPLATE_DIR = PROJECT_ROOT / "templates"
METADATA_PREFIX = "# "


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        log_error(f"[_ensure_parent] 디렉토리 생성 실패: {path.parent} - {e}")
        raise


def dump_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True)


def write_csv(path: Union[str, Path], frame: pd.DataFrame, metadata: Dict[str, Any]) -> Path:
    """
    메타데이터 주석 + CSV 저장.

    Example:
        # {
        #   "convention": "hamiltonian_consistent",
        #   ...
        # }
        t,mean_Z,std_Z
        0,1,0
    """
    path = Path(path)
    _ensure_parent(path)
    header = "".join(f"{METADATA_PREFIX}{line}\n" for line in dump_json(metadata).splitlines())
    body = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(header)
        f.write(body)
    log_debug(f"[write_csv] 저장 완료: {path} (shape={frame.shape})")
    return path


def read_csv_with_metadata(path: Union[str, Path]) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    meta_lines = []
    data_lines = []
    for line in text.splitlines(keepends=True):
        if not data_lines and line.startswith(METADATA_PREFIX.rstrip()):
            meta_lines.append(line[len(METADATA_PREFIX):] if line.startswith(METADATA_PREFIX) else "")
        else:
            data_lines.append(line)
    metadata = json.loads("".join(meta_lines)) if meta_lines else {}
    frame = pd.read_csv(io.StringIO("".join(data_lines)), float_precision="round_trip")
    return frame, metadata


def write_json(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    path = Path(path)
    _ensure_parent(path)
    path.write_text(dump_json(payload) + "\n", encoding="utf-8")
    log_debug(f"[write_json] 저장 완료: {path}")
    return path


def render_template(template_name: str, out_path: Union[str, Path], **values: Any) -> Path:
    """templates/<template_name> 의 $name 자리표시자를 채워 out_path 에 저장."""
    source = TEMPLATE_DIR / template_name
    try:
        template = Template(source.read_text(encoding="utf-8"))
    except FileNotFoundError:
        log_error(f"[render_template] 템플릿 없음: {source}")
        raise
    out_path = Path(out_path)
    _ensure_parent(out_path)
    out_path.write_text(template.substitute(**{k: str(v) for k, v in values.items()}), encoding="utf-8")
    log_info(f"[render_template] {template_name} -> {out_path}")
    return out_path
