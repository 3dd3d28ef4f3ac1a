#!/usr/bin/env python3
"""
파일명: scripts/chiralenv/chiralenv-cli.py
목적: src/ 를 import 경로에 넣고 chiralenv CLI 실행
사용 예:
  python scripts/chiralenv/chiralenv-cli.py ensemble --config config/fig3.yml --n 400 --workers 4
"""

import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT / "src"))

from chiralenv.cli import app  # noqa: E402
from common.logger import log_error  # noqa: E402

if __name__ == "__main__":
    try:
        app()
    except Exception as e:
        log_error(str(e))
        sys.exit(1)
