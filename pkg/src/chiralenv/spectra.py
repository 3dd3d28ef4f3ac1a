"""
파일명: src/chiralenv/spectra.py
목적: 혼합각, 블록 해밀토니안 고유값, 거울상 에너지 및 패리티 위반 에너지 차이
기능:
  - mixing_angle: theta = 1/2 atan2(delta, eps_eff), [0, pi/2]
  - system_split / environment_split: 평균장으로 이동한 eps_eff 에서 E_+-, E_L, E_R, delta_E
  - split_oracle: 2x2 에르미트 행렬 수치 대각화 (numpy.linalg.eigh), 내림차순
  - splits_along_trajectory: 궤적의 각 시각에서 중심 분자 분리
설명:
  - eps_eff = eps + 1/2 Lambda sum_i z_i (완전제곱 형태)
  - 고유값 lambda_+- = +- sqrt(eps_eff^2 + delta^2)
  - E_L = lambda_+ cos^2 theta + lambda_- sin^2 theta = eps_eff 이므로 delta_E = 2 eps_eff
변경이력:
  - 2026-10-19: 최초 구현
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from chiralenv.core import TwoLevelParams
from chiralenv.errors import DegenerateAngleError, DomainError

HERMITIAN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MixingAngle:
    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2):
            raise DomainError(f"mixing angle out of [0, pi/2]: {self.theta}")


@dataclass(frozen=True)
class EnergySplit:
    lambda_plus: float
    lambda_minus: float
    E_L: float
    E_R: float
    delta_E: float
    epsilon_eff: float
    theta: float

    def as_dict(self) -> dict:
        return {
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "E_L": self.E_L,
            "E_R": self.E_R,
            "delta_E": self.delta_E,
            "epsilon_eff": self.epsilon_eff,
            "theta": self.theta,
        }


def mixing_angle(delta: float, epsilon_eff: float) -> MixingAngle:
    """tan 2 theta = delta / eps_eff. delta >= 0 이면 atan2 가 [0, pi] 이므로 theta 는 [0, pi/2]."""
    if delta == 0.0 and epsilon_eff == 0.0:
        raise DegenerateAngleError("mixing angle undefined for delta = epsilon_eff = 0")
    if delta < 0:
        raise DomainError(f"delta must be >= 0 (got {delta})")
    return MixingAngle(0.5 * math.atan2(delta, epsilon_eff))


def _split(delta: float, epsilon_eff: float) -> EnergySplit:
    if not (math.isfinite(delta) and math.isfinite(epsilon_eff)):
        raise DomainError(f"non-finite split input: delta={delta}, epsilon_eff={epsilon_eff}")
    lam = math.hypot(epsilon_eff, delta)
    if lam == 0.0:
        # 완전 축퇴: 모든 에너지 0, theta 는 0으로 둔다
        return EnergySplit(0.0, 0.0, 0.0, 0.0, 0.0, epsilon_eff, 0.0)
    theta = mixing_angle(delta, epsilon_eff).theta
    cos2 = math.cos(theta) ** 2
    sin2 = math.sin(theta) ** 2
    e_l = lam * cos2 - lam * sin2
    e_r = lam * sin2 - lam * cos2
    return EnergySplit(lam, -lam, e_l, e_r, e_l - e_r, epsilon_eff, theta)


def system_split(params: TwoLevelParams, lam: float, env_z: Sequence[float]) -> EnergySplit:
    """중심 분자 블록 [[eps_eff, delta], [delta, -eps_eff]], eps_eff = eps + 1/2 Lambda sum_i z_i."""
    total = 0.0
    for z in env_z:
        if abs(z) > 1.0:
            raise DomainError(f"environment population difference out of [-1, 1]: {z}")
        total += z
    return _split(params.delta, params.epsilon + 0.5 * lam * total)


def environment_split(params_i: TwoLevelParams, lam: float, system_z: float) -> EnergySplit:
    """환경 분자 i 블록, eps_eff = eps_i + 1/2 Lambda Z."""
    if abs(system_z) > 1.0:
        raise DomainError(f"system population difference out of [-1, 1]: {system_z}")
    return _split(params_i.delta, params_i.epsilon + 0.5 * lam * system_z)


def split_oracle(matrix: Union[Sequence[Sequence[complex]], np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """
    2x2 에르미트 행렬의 (고유값 내림차순, 열 고유벡터) 반환.

    Raises:
        DomainError: 2x2 가 아니거나 에르미트가 아닐 때
    """
    h = np.asarray(matrix, dtype=complex)
    if h.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {h.shape}")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOLERANCE * scale:
        raise DomainError("matrix is not Hermitian")
    values, vectors = np.linalg.eigh(h)
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def splits_along_trajectory(trajectory, lam: Optional[float] = None) -> list:
    """
    궤적의 기록 시각마다 중심 분자의 EnergySplit 을 계산한다.
    lam 미지정 시 궤적의 결합상수를 그대로 쓴다 (비균일 Lambda_i 허용: sum_i Lambda_i z_i / 2).
    """
    initial = trajectory.initial
    _, _, env_z, _ = trajectory.classical_columns()
    params = initial.system_params
    lambdas = np.full(initial.n_env, lam, dtype=float) if lam is not None else np.array(initial.lambdas, dtype=float)
    splits = []
    for row in env_z:
        shift = 0.0
        for l_i, z_i in zip(lambdas, row):
            shift += l_i * z_i
        splits.append(_split(params.delta, params.epsilon + 0.5 * shift))
    return splits
