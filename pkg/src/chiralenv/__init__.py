"""키랄 분자 계+환경 모델 시뮬레이션."""

__version__ = "0.1.0"
