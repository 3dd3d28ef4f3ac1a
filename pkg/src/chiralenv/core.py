"""
파일명: src/chiralenv/core.py
목적: 2준위 키랄 분자 모델의 도메인 타입과 해밀토니안 값 함수
기능:
  - TwoLevelParams / MoleculeState / AmplitudeState / SystemEnvState / AmplitudeSystemEnvState
  - Madelung 변환: 진폭 (a_L, a_R) <-> 고전 변수 (z, phi)
  - H0, H_total 값 (고전 좌표식과 진폭식 두 가지)
  - 고립 분자의 해석해 Z(t) (Rabi 진동)
설명:
  - 단위: hbar = 1, 에너지와 시간은 무차원 모델 단위
  - z = |a_R|^2 - |a_L|^2, phi = arg(a_L) - arg(a_R)
  - 해밀턴 방정식의 정준 위상은 arg(a_R) - arg(a_L) 방향이다.
    classical_from_amplitude / amplitude_from_classical 이 이 부호를 처리한다.
변경이력:
  - 2026-10-19: 최초 구현
"""

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from chiralenv.errors import DomainError, NormalizationError

NORM_TOLERANCE = 1e-9
TWO_PI = 2.0 * math.pi


class CouplingConvention(str, Enum):
    """환경 분자 쪽 결합항의 형태. 실행마다 하나만 활성, 모든 출력 메타데이터에 기록."""

    HAMILTONIAN_CONSISTENT = "hamiltonian_consistent"
    PAPER_LITERAL = "paper_literal"

    @classmethod
    def parse(cls, value: "str | CouplingConvention") -> "CouplingConvention":
        """'hamiltonian' / 'paper' 약칭도 허용."""
        if isinstance(value, cls):
            return value
        aliases = {"hamiltonian": cls.HAMILTONIAN_CONSISTENT, "paper": cls.PAPER_LITERAL}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(
                f"unknown coupling convention '{value}' "
                f"(expected one of: hamiltonian, paper, {', '.join(c.value for c in cls)})"
            ) from None


@dataclass(frozen=True)
class TwoLevelParams:
    """delta: 터널링 반분리, epsilon: PVED 반분리 (2*epsilon 이 PVED)."""

    delta: float
    epsilon: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.epsilon)):
            raise DomainError(f"two-level parameters must be finite: {self}")
        if self.delta < 0:
            raise DomainError(f"delta must be >= 0 (got {self.delta})")


@dataclass(frozen=True)
class MoleculeState:
    """고전 변수 쌍. phi는 unwrap 상태로 저장, 비교는 mod 2pi."""

    z: float
    phi: float
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.phi) or not math.isfinite(self.z):
            raise DomainError(f"molecule state must be finite: z={self.z}, phi={self.phi}")
        if abs(self.z) > 1.0:
            raise DomainError(f"population difference out of [-1, 1]: z={self.z}")

    def mirrored(self) -> "MoleculeState":
        """거울상: z -> -z, phi -> -phi (mod 2pi)."""
        return MoleculeState(-self.z, wrap_phase(-self.phi), self.degenerate)


@dataclass(frozen=True)
class AmplitudeState:
    a_L: complex
    a_R: complex

    def __post_init__(self):
        n = self.norm()
        if not math.isfinite(n) or abs(n - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"|a_L|^2 + |a_R|^2 = {n!r} deviates from 1 by more than {NORM_TOLERANCE}")

    def norm(self) -> float:
        return abs(self.a_L) ** 2 + abs(self.a_R) ** 2


def _check_member_lengths(env: Sequence, env_params: Sequence, lambdas: Sequence) -> None:
    if not (len(env) == len(env_params) == len(lambdas)):
        raise DomainError(
            f"env ({len(env)}), env_params ({len(env_params)}) and lambdas ({len(lambdas)}) "
            "must have identical length"
        )
    for lam in lambdas:
        if not math.isfinite(lam):
            raise DomainError(f"coupling strengths must be finite: {lam}")


@dataclass(frozen=True)
class SystemEnvState:
    """중심 분자 + N개 환경 분자의 고전 위상공간 점 (차원 2 + 2N)."""

    system: MoleculeState
    system_params: TwoLevelParams
    env: Tuple[MoleculeState, ...] = ()
    env_params: Tuple[TwoLevelParams, ...] = ()
    lambdas: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "env", tuple(self.env))
        object.__setattr__(self, "env_params", tuple(self.env_params))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        _check_member_lengths(self.env, self.env_params, self.lambdas)

    @property
    def n_env(self) -> int:
        return len(self.env)

    def to_vector(self) -> np.ndarray:
        """[Z, Phi, z_1, phi_1, ..., z_N, phi_N]"""
        values = [self.system.z, self.system.phi]
        for m in self.env:
            values.extend((m.z, m.phi))
        return np.array(values, dtype=float)

    def with_vector(self, y: np.ndarray) -> "SystemEnvState":
        """같은 파라미터로 위상공간 점만 교체."""
        system = MoleculeState(float(y[0]), float(y[1]))
        env = tuple(MoleculeState(float(y[2 + 2 * i]), float(y[3 + 2 * i])) for i in range(self.n_env))
        return SystemEnvState(system, self.system_params, env, self.env_params, self.lambdas)

    def permuted(self, order: Sequence[int]) -> "SystemEnvState":
        """환경 분자 재배열 (파라미터와 결합상수를 함께 이동)."""
        return SystemEnvState(
            self.system,
            self.system_params,
            tuple(self.env[i] for i in order),
            tuple(self.env_params[i] for i in order),
            tuple(self.lambdas[i] for i in order),
        )


@dataclass(frozen=True)
class AmplitudeSystemEnvState:
    """SystemEnvState의 진폭 표현 (진폭 형태 적분기의 입력)."""

    system: AmplitudeState
    system_params: TwoLevelParams
    env: Tuple[AmplitudeState, ...] = ()
    env_params: Tuple[TwoLevelParams, ...] = ()
    lambdas: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "env", tuple(self.env))
        object.__setattr__(self, "env_params", tuple(self.env_params))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        _check_member_lengths(self.env, self.env_params, self.lambdas)

    @property
    def n_env(self) -> int:
        return len(self.env)

    def to_vector(self) -> np.ndarray:
        """실수 배열 [Re a_L, Im a_L, Re a_R, Im a_R, (b_L1, b_R1 동일 배치), ...]"""
        values: List[float] = []
        for amp in (self.system,) + self.env:
            values.extend((amp.a_L.real, amp.a_L.imag, amp.a_R.real, amp.a_R.imag))
        return np.array(values, dtype=float)

    def with_vector(self, y: np.ndarray) -> "AmplitudeSystemEnvState":
        amps = [
            AmplitudeState(complex(y[4 * k], y[4 * k + 1]), complex(y[4 * k + 2], y[4 * k + 3]))
            for k in range(self.n_env + 1)
        ]
        return AmplitudeSystemEnvState(amps[0], self.system_params, tuple(amps[1:]), self.env_params, self.lambdas)


# ---------------------------------------------------------------------------
# Madelung 변환
# ---------------------------------------------------------------------------

def wrap_phase(phi: float) -> float:
    """[0, 2pi)로 환원."""
    wrapped = math.fmod(phi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


def madelung_forward(amp: AmplitudeState) -> MoleculeState:
    """
    (a_L, a_R) -> (z, phi), z = |a_R|^2 - |a_L|^2, phi = arg a_L - arg a_R in [0, 2pi).
    한쪽 진폭이 0이면 phi가 정의되지 않으므로 phi = 0, degenerate=True.
    """
    pop_l = abs(amp.a_L) ** 2
    pop_r = abs(amp.a_R) ** 2
    # 노름 허용오차 안에서 |z|가 1을 살짝 넘을 수 있다
    z = min(1.0, max(-1.0, pop_r - pop_l))
    if amp.a_L == 0 or amp.a_R == 0:
        return MoleculeState(z, 0.0, degenerate=True)
    phi = wrap_phase(cmath.phase(amp.a_L) - cmath.phase(amp.a_R))
    return MoleculeState(z, phi)


def madelung_inverse(state: MoleculeState, global_phase: float = 0.0) -> AmplitudeState:
    """(z, phi) -> (a_L, a_R), 게이지 규약 arg(a_R) = global_phase."""
    if abs(state.z) > 1.0:
        raise DomainError(f"|z| > 1 has no amplitude representation: z={state.z}")
    mod_l = math.sqrt((1.0 - state.z) / 2.0)
    mod_r = math.sqrt((1.0 + state.z) / 2.0)
    return AmplitudeState(
        cmath.rect(mod_l, global_phase + state.phi),
        cmath.rect(mod_r, global_phase),
    )


def classical_from_amplitude(amp: AmplitudeState) -> MoleculeState:
    """진폭 -> 해밀턴 방정식의 정준 좌표 (Z, Phi), Phi = arg a_R - arg a_L."""
    forward = madelung_forward(amp)
    return MoleculeState(forward.z, wrap_phase(-forward.phi), forward.degenerate)


def amplitude_from_classical(state: MoleculeState, global_phase: float = 0.0) -> AmplitudeState:
    """classical_from_amplitude의 역변환."""
    return madelung_inverse(MoleculeState(state.z, -state.phi), global_phase)


def amplitude_env_from_classical(state: SystemEnvState, global_phase: float = 0.0) -> AmplitudeSystemEnvState:
    """고전 상태 전체를 같은 궤적을 주는 진폭 상태로 변환."""
    return AmplitudeSystemEnvState(
        amplitude_from_classical(state.system, global_phase),
        state.system_params,
        tuple(amplitude_from_classical(m, global_phase) for m in state.env),
        state.env_params,
        state.lambdas,
    )


# ---------------------------------------------------------------------------
# 해밀토니안
# ---------------------------------------------------------------------------

def h0_value(state: MoleculeState, params: TwoLevelParams) -> float:
    """H0 = -2 delta sqrt(1 - z^2) cos(phi) + 2 epsilon z"""
    if abs(state.z) > 1.0:
        raise DomainError(f"|z| > 1: z={state.z}")
    return -2.0 * params.delta * math.sqrt(1.0 - state.z * state.z) * math.cos(state.phi) + 2.0 * params.epsilon * state.z


def total_h_value(s: SystemEnvState) -> float:
    """H_S + sum_i H_E,i + Z sum_i Lambda_i z_i"""
    energy = h0_value(s.system, s.system_params)
    coupling = 0.0
    for member, params, lam in zip(s.env, s.env_params, s.lambdas):
        energy += h0_value(member, params)
        coupling += lam * member.z
    return energy + s.system.z * coupling


def h0_amplitude_value(amp: AmplitudeState, params: TwoLevelParams) -> float:
    """H0를 진폭으로: -4 delta Re(conj(a_L) a_R) + 2 epsilon (|a_R|^2 - |a_L|^2). 극점에서도 정칙."""
    z = abs(amp.a_R) ** 2 - abs(amp.a_L) ** 2
    return -4.0 * params.delta * (amp.a_L.conjugate() * amp.a_R).real + 2.0 * params.epsilon * z


def total_h_amplitude_value(s: AmplitudeSystemEnvState) -> float:
    energy = h0_amplitude_value(s.system, s.system_params)
    coupling = 0.0
    for member, params, lam in zip(s.env, s.env_params, s.lambdas):
        energy += h0_amplitude_value(member, params)
        coupling += lam * (abs(member.a_R) ** 2 - abs(member.a_L) ** 2)
    big_z = abs(s.system.a_R) ** 2 - abs(s.system.a_L) ** 2
    return energy + big_z * coupling


def rabi_z(times: Iterable[float], params: TwoLevelParams, z0: float) -> np.ndarray:
    """
    고립 분자(Lambda = 0)를 극점 z0 = +-1 에서 시작했을 때의 해석해
    Z(t) = z0 (eps^2 + delta^2 cos(2 W t)) / W^2,  W = sqrt(eps^2 + delta^2)
    """
    if abs(z0) != 1.0:
        raise DomainError(f"analytic oscillation is provided for pole starts only (z0 = +-1), got {z0}")
    t = np.asarray(list(times) if not isinstance(times, np.ndarray) else times, dtype=float)
    w2 = params.epsilon ** 2 + params.delta ** 2
    if w2 == 0.0:
        return np.full_like(t, z0)
    w = math.sqrt(w2)
    return z0 * (params.epsilon ** 2 + params.delta ** 2 * np.cos(2.0 * w * t)) / w2
