"""
파일명: src/chiralenv/errors.py
목적: 시뮬레이션 전 모듈 공용 예외 계층
변경이력:
  - 2026-10-19: 최초 구현
"""

from typing import Optional


class ChiralEnvError(Exception):
    """패키지 최상위 예외."""


class DomainError(ChiralEnvError, ValueError):
    """정의역 밖의 입력 (|z| > 1, r <= 0, 비에르미트 행렬 등)."""


class NormalizationError(DomainError):
    """진폭 노름이 허용오차(1e-9)를 벗어남."""


class DegenerateAngleError(DomainError):
    """delta = epsilon_eff = 0 이라 혼합각이 정의되지 않음."""


class ConfigError(ChiralEnvError):
    """설정 오류. key는 문제의 점 표기 경로 (예: coupling.lamda)."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.message = message
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)

    def __reduce__(self):
        return (self.__class__, (self.message, self.key))


class NumericalError(ChiralEnvError):
    """수치 적분 실패의 공통 부모."""


class SingularityError(NumericalError):
    """|z| >= 1 - 1e-12 에서 고전 좌표가 특이해짐."""

    def __init__(self, z: float, molecule: int, time: Optional[float] = None, row: int = 0):
        self.z = z
        self.molecule = molecule
        self.time = time
        self.row = row
        where = "system" if molecule == 0 else f"environment molecule {molecule}"
        at = f" at t={time:.6g}" if time is not None else ""
        super().__init__(f"coordinate singularity for {where}{at}: |z|={abs(z):.15g}")

    def __reduce__(self):
        return (self.__class__, (self.z, self.molecule, self.time, self.row))

    def at_time(self, time: float) -> "SingularityError":
        return SingularityError(self.z, self.molecule, time, self.row)


class IntegrationError(NumericalError):
    """적응 스텝 실패 (최소 스텝 언더플로우 등)."""

    def __init__(self, message: str, time: float):
        self.message = message
        self.time = time
        super().__init__(f"{message} (t={time:.6g})")

    def __reduce__(self):
        return (self.__class__, (self.message, self.time))


class RealizationError(NumericalError):
    """앙상블 중 한 realization 실패. index/seed로 재현 가능."""

    def __init__(self, index: int, seed: int, cause: Exception):
        self.index = index
        self.seed = seed
        self.cause = cause
        super().__init__(f"realization {index} (master_seed={seed}) failed: {cause}")

    def __reduce__(self):
        return (self.__class__, (self.index, self.seed, self.cause))
