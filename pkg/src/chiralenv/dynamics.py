"""
파일명: src/chiralenv/dynamics.py
목적: 고전 해밀턴 방정식과 진폭형 비선형 슈뢰딩거 방정식의 우변 및 시간 적분기
기능:
  - hamilton_rhs: (Z, Phi, z_i, phi_i) 속도, 결합 규약(hamiltonian_consistent / paper_literal) 전환
  - amplitude_rhs: (a_L, a_R, b_Li, b_Ri) 시간미분 (Gross-Pitaevskii 형태 평균장 결합)
  - integrate: 고정 스텝 RK4 또는 적응 RK45(scipy.integrate.solve_ivp)로 Trajectory 생성
  - cross_formalism_check: 두 표현을 Madelung 대응 초기조건에서 적분해 Z(t) 최대 편차 반환
  - estimate_angular_frequency: 도함수 영점 교차로 진동 각주파수 추정
설명:
  - 내부 커널은 (B, D) 실수 배열을 한 번에 적분한다 (B = realization 수). 앙상블이 같은 커널을 쓴다.
  - 결합합 sum_i Lambda_i z_i 는 열 순서대로 누적한다. 행 수(B)와 무관하게 행별 결과가 비트 단위로 같다.
  - 고전 좌표는 |z| >= 1 - 1e-12 에서 특이. 클램프하지 않고 SingularityError.
변경이력:
  - 2026-10-19: 최초 구현
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from chiralenv.core import (
    NORM_TOLERANCE,
    TWO_PI,
    AmplitudeState,
    AmplitudeSystemEnvState,
    CouplingConvention,
    SystemEnvState,
    TwoLevelParams,
    amplitude_env_from_classical,
)
from chiralenv.errors import DomainError, IntegrationError, NormalizationError, SingularityError
from common.logger import log_debug, log_info

SINGULARITY_MARGIN = 1e-12


class IntegratorMethod(str, Enum):
    RK4_FIXED = "rk4_fixed"
    RK45_ADAPTIVE = "rk45_adaptive"


class Representation(str, Enum):
    CLASSICAL = "classical"
    AMPLITUDE = "amplitude"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_final: float = 20.0
    method: IntegratorMethod = IntegratorMethod.RK4_FIXED
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    record_stride: int = 1

    def __post_init__(self):
        object.__setattr__(self, "method", IntegratorMethod(self.method))
        for name in ("dt", "t_final", "abs_tol", "rel_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"integrator.{name} must be a positive finite number (got {value})")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise DomainError(f"integrator.record_stride must be an integer >= 1 (got {self.record_stride})")
        n = round(self.t_final / self.dt)
        if n < 1 or abs(n * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            raise DomainError(f"t_final ({self.t_final}) must be a positive integer multiple of dt ({self.dt})")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def sample_steps(self) -> np.ndarray:
        """기록할 스텝 인덱스: 0, k, 2k, ... (마지막 스텝은 항상 포함)."""
        steps = list(range(0, self.n_steps + 1, int(self.record_stride)))
        if steps[-1] != self.n_steps:
            steps.append(self.n_steps)
        return np.array(steps, dtype=np.int64)

    def sample_times(self) -> np.ndarray:
        return self.sample_steps() * self.dt


@dataclass(frozen=True)
class CouplingArrays:
    """
    배치 커널용 파라미터 배열. 모든 배열은 (B, ...) 또는 (1, ...)로 브로드캐스트된다.
      delta, epsilon: (., 1 + N), 0열이 중심 분자
      lambdas: (., N)
    """

    delta: np.ndarray
    epsilon: np.ndarray
    lambdas: np.ndarray
    convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT

    @property
    def n_env(self) -> int:
        return self.lambdas.shape[-1]

    @classmethod
    def from_params(
        cls,
        system_params: TwoLevelParams,
        env_params: Sequence[TwoLevelParams],
        lambdas: Sequence[float],
        convention: CouplingConvention,
    ) -> "CouplingArrays":
        all_params = [system_params] + list(env_params)
        return cls(
            delta=np.array([[p.delta for p in all_params]], dtype=float),
            epsilon=np.array([[p.epsilon for p in all_params]], dtype=float),
            lambdas=np.array([list(lambdas)], dtype=float).reshape(1, len(env_params)),
            convention=CouplingConvention.parse(convention),
        )


def _ordered_sum(terms: np.ndarray) -> np.ndarray:
    """마지막 축을 열 순서대로 더한다 (축약 순서 고정)."""
    total = np.zeros(terms.shape[:-1])
    for i in range(terms.shape[-1]):
        total = total + terms[..., i]
    return total


# ---------------------------------------------------------------------------
# 배치 우변 (B, D)
# ---------------------------------------------------------------------------

def _classical_rhs_batch(y: np.ndarray, p: CouplingArrays) -> np.ndarray:
    """y: (B, 2 + 2N) = [Z, Phi, z_1, phi_1, ...]"""
    big_z = np.ascontiguousarray(y[:, 0])
    big_phi = np.ascontiguousarray(y[:, 1])
    z = np.ascontiguousarray(y[:, 2::2])
    phi = np.ascontiguousarray(y[:, 3::2])

    limit = 1.0 - SINGULARITY_MARGIN
    if np.any(np.abs(big_z) >= limit) or np.any(np.abs(z) >= limit):
        full = np.concatenate([big_z[:, None], z], axis=1)
        row, mol = np.argwhere(np.abs(full) >= limit)[0]
        raise SingularityError(float(full[row, mol]), int(mol), row=int(row))

    d_sys = p.delta[:, 0]
    e_sys = p.epsilon[:, 0]
    d_env = p.delta[:, 1:]
    e_env = p.epsilon[:, 1:]

    root_sys = np.sqrt(1.0 - big_z * big_z)
    root_env = np.sqrt(1.0 - z * z)

    coupling_sys = _ordered_sum(p.lambdas * z)
    if p.convention is CouplingConvention.HAMILTONIAN_CONSISTENT:
        coupling_env = p.lambdas * big_z[:, None]
    else:
        # 인쇄된 식 그대로: 각 phi_i 에 Z * sum_j Lambda_j
        coupling_env = (big_z * _ordered_sum(p.lambdas))[:, None] * np.ones_like(z)

    out = np.empty_like(y)
    out[:, 0] = -2.0 * d_sys * root_sys * np.sin(big_phi)
    out[:, 1] = 2.0 * e_sys + 2.0 * d_sys * big_z * np.cos(big_phi) / root_sys + coupling_sys
    out[:, 2::2] = -2.0 * d_env * root_env * np.sin(phi)
    out[:, 3::2] = 2.0 * e_env + 2.0 * d_env * z * np.cos(phi) / root_env + coupling_env
    return out


def _amplitude_rhs_batch(y: np.ndarray, p: CouplingArrays) -> np.ndarray:
    """
    y: (B, 4 (1 + N)) = [Re a_L, Im a_L, Re a_R, Im a_R, ...] (분자마다 4열)
    i da_L/dt = (eps + c) a_L + delta a_R,  i da_R/dt = delta a_L - (eps + c) a_R
    중심 분자 c = 1/2 sum_i Lambda_i z_i, 환경 분자 c_i = 1/2 Lambda_i Z (paper_literal: 1/2 N Lambda_i Z)
    """
    lr, li, rr, ri = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    blr, bli, brr, bri = y[:, 4::4], y[:, 5::4], y[:, 6::4], y[:, 7::4]

    big_z = (rr * rr + ri * ri) - (lr * lr + li * li)
    z = (brr * brr + bri * bri) - (blr * blr + bli * bli)

    c_sys = 0.5 * _ordered_sum(p.lambdas * z)
    if p.convention is CouplingConvention.HAMILTONIAN_CONSISTENT:
        c_env = 0.5 * p.lambdas * big_z[:, None]
    else:
        c_env = 0.5 * p.n_env * p.lambdas * big_z[:, None]

    d_sys = p.delta[:, 0]
    diag_sys = p.epsilon[:, 0] + c_sys
    d_env = p.delta[:, 1:]
    diag_env = p.epsilon[:, 1:] + c_env

    out = np.empty_like(y)
    # h = H a ; da/dt = -i h  ->  Re(da) = Im(h), Im(da) = -Re(h)
    out[:, 0] = diag_sys * li + d_sys * ri
    out[:, 1] = -(diag_sys * lr + d_sys * rr)
    out[:, 2] = d_sys * li - diag_sys * ri
    out[:, 3] = -(d_sys * lr - diag_sys * rr)
    out[:, 4::4] = diag_env * bli + d_env * bri
    out[:, 5::4] = -(diag_env * blr + d_env * brr)
    out[:, 6::4] = d_env * bli - diag_env * bri
    out[:, 7::4] = -(d_env * blr - diag_env * brr)
    return out


def rhs_for(representation: Representation) -> Callable[[np.ndarray, CouplingArrays], np.ndarray]:
    return _classical_rhs_batch if Representation(representation) is Representation.CLASSICAL else _amplitude_rhs_batch


# ---------------------------------------------------------------------------
# 배치 관측량
# ---------------------------------------------------------------------------

def system_z_batch(y: np.ndarray, representation: Representation) -> np.ndarray:
    """행별 중심 분자 Z."""
    if Representation(representation) is Representation.CLASSICAL:
        return y[:, 0].copy()
    return (y[:, 2] ** 2 + y[:, 3] ** 2) - (y[:, 0] ** 2 + y[:, 1] ** 2)


def energy_batch(y: np.ndarray, p: CouplingArrays, representation: Representation) -> np.ndarray:
    """행별 H_total (고전식 또는 진폭식)."""
    if Representation(representation) is Representation.CLASSICAL:
        z = y[:, 0::2]
        phi = y[:, 1::2]
        h0 = -2.0 * p.delta * np.sqrt(np.clip(1.0 - z * z, 0.0, None)) * np.cos(phi) + 2.0 * p.epsilon * z
    else:
        lr, li, rr, ri = y[:, 0::4], y[:, 1::4], y[:, 2::4], y[:, 3::4]
        z = (rr * rr + ri * ri) - (lr * lr + li * li)
        overlap = lr * rr + li * ri  # Re(conj(a_L) a_R)
        h0 = -4.0 * p.delta * overlap + 2.0 * p.epsilon * z
    coupling = z[:, 0] * _ordered_sum(p.lambdas * z[:, 1:])
    return _ordered_sum(h0) + coupling


def norms_batch(y: np.ndarray) -> np.ndarray:
    """(B, 1 + N) 분자별 노름 (진폭 표현)."""
    return y[:, 0::4] ** 2 + y[:, 1::4] ** 2 + y[:, 2::4] ** 2 + y[:, 3::4] ** 2


# ---------------------------------------------------------------------------
# 배치 적분기
# ---------------------------------------------------------------------------

Observer = Callable[[np.ndarray], np.ndarray]


def _rk4_batch(
    y0: np.ndarray,
    rhs: Callable[[np.ndarray, CouplingArrays], np.ndarray],
    p: CouplingArrays,
    cfg: IntegratorConfig,
    observe: Observer,
) -> Tuple[np.ndarray, np.ndarray]:
    dt = cfg.dt
    half = 0.5 * dt
    sixth = dt / 6.0
    steps = cfg.sample_steps()
    samples = [observe(y0)]
    y = y0.copy()
    next_sample = 1
    for n in range(1, cfg.n_steps + 1):
        t = (n - 1) * dt
        try:
            k1 = rhs(y, p)
            k2 = rhs(y + half * k1, p)
            k3 = rhs(y + half * k2, p)
            k4 = rhs(y + dt * k3, p)
        except SingularityError as e:
            raise e.at_time(t) from None
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if next_sample < len(steps) and n == steps[next_sample]:
            samples.append(observe(y))
            next_sample += 1
    return steps * dt, np.stack(samples)


def _rk45_batch(
    y0: np.ndarray,
    rhs: Callable[[np.ndarray, CouplingArrays], np.ndarray],
    p: CouplingArrays,
    cfg: IntegratorConfig,
    observe: Observer,
) -> Tuple[np.ndarray, np.ndarray]:
    shape = y0.shape
    times = cfg.sample_times()

    def fun(t, flat):
        try:
            return rhs(flat.reshape(shape), p).ravel()
        except SingularityError as e:
            raise e.at_time(t) from None

    sol = solve_ivp(
        fun,
        (0.0, float(times[-1])),
        y0.ravel(),
        method="RK45",
        t_eval=times,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        first_step=cfg.dt,
    )
    if sol.status != 0:
        failed_at = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"adaptive RK45 failed: {sol.message}", failed_at)
    samples = [observe(sol.y[:, k].reshape(shape)) for k in range(sol.y.shape[1])]
    return times, np.stack(samples)


def integrate_batch(
    y0: np.ndarray,
    p: CouplingArrays,
    cfg: IntegratorConfig,
    representation: Representation,
    observe: Optional[Observer] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (B, D) 초기 상태를 함께 적분하여 (times, observations) 반환.
    observations[k] = observe(y(times[k])), 기본 observe는 상태 복사본.
    """
    observe = observe or (lambda y: y.copy())
    rhs = rhs_for(representation)
    if cfg.method is IntegratorMethod.RK4_FIXED:
        return _rk4_batch(np.asarray(y0, dtype=float), rhs, p, cfg, observe)
    return _rk45_batch(np.asarray(y0, dtype=float), rhs, p, cfg, observe)


# ---------------------------------------------------------------------------
# 공개 연산
# ---------------------------------------------------------------------------

def hamilton_rhs(s: SystemEnvState, convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT) -> np.ndarray:
    """[dZ/dt, dPhi/dt, dz_1/dt, dphi_1/dt, ...]"""
    p = CouplingArrays.from_params(s.system_params, s.env_params, s.lambdas, convention)
    return _classical_rhs_batch(s.to_vector()[None, :], p)[0]


def amplitude_rhs(
    sys: AmplitudeState,
    env: Sequence[AmplitudeState],
    system_params: TwoLevelParams,
    env_params: Sequence[TwoLevelParams],
    lambdas: Sequence[float],
    convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT,
) -> Tuple[Tuple[complex, complex], List[Tuple[complex, complex]]]:
    """((da_L, da_R), [(db_L1, db_R1), ...])"""
    for amp in [sys] + list(env):
        if abs(amp.norm() - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"amplitude norm {amp.norm()!r} deviates from 1")
    state = AmplitudeSystemEnvState(sys, system_params, tuple(env), tuple(env_params), tuple(lambdas))
    p = CouplingArrays.from_params(system_params, env_params, lambdas, convention)
    d = _amplitude_rhs_batch(state.to_vector()[None, :], p)[0]
    pairs = [(complex(d[4 * k], d[4 * k + 1]), complex(d[4 * k + 2], d[4 * k + 3])) for k in range(len(env) + 1)]
    return pairs[0], pairs[1:]


@dataclass
class Trajectory:
    """
    기록 격자 위의 상태열. states 는 (T, D) 실수 배열로 보관하고 state_at(k)로 도메인 타입을 얻는다.
    conserved_energy_drift = max |H(t) - H(0)| / max(1, |H(0)|)
    """

    times: np.ndarray
    states: np.ndarray
    representation: Representation
    initial: Union[SystemEnvState, AmplitudeSystemEnvState]
    convention: CouplingConvention
    energies: np.ndarray
    conserved_energy_drift: float
    norm_drift: float = 0.0

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise DomainError("times and states must have the same length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")

    @property
    def n_env(self) -> int:
        return self.initial.n_env

    def state_at(self, k: int) -> Union[SystemEnvState, AmplitudeSystemEnvState]:
        return self.initial.with_vector(self.states[k])

    def classical_columns(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(Z, Phi, z (T, N), phi (T, N)). 진폭 표현이면 정준 위상 arg a_R - arg a_L 로 변환, 극점은 phi = 0."""
        if self.representation is Representation.CLASSICAL:
            y = self.states
            return y[:, 0], y[:, 1], y[:, 2::2], y[:, 3::2]
        y = self.states
        lr, li, rr, ri = y[:, 0::4], y[:, 1::4], y[:, 2::4], y[:, 3::4]
        z = np.clip((rr * rr + ri * ri) - (lr * lr + li * li), -1.0, 1.0)
        # conj(a_L) a_R 의 편각
        phi = np.mod(np.arctan2(lr * ri - li * rr, lr * rr + li * ri), TWO_PI)
        phi = np.where(np.abs(z) == 1.0, 0.0, phi)
        return z[:, 0], phi[:, 0], z[:, 1:], phi[:, 1:]

    @property
    def Z(self) -> np.ndarray:
        return system_z_batch(self.states, self.representation)


def integrate(
    initial: Union[SystemEnvState, AmplitudeSystemEnvState],
    cfg: IntegratorConfig,
    convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT,
) -> Trajectory:
    """단일 궤적 적분. 초기 상태 타입이 표현(고전/진폭)을 결정한다."""
    convention = CouplingConvention.parse(convention)
    if isinstance(initial, SystemEnvState):
        representation = Representation.CLASSICAL
    elif isinstance(initial, AmplitudeSystemEnvState):
        representation = Representation.AMPLITUDE
    else:
        raise DomainError(f"unsupported initial state type: {type(initial).__name__}")

    p = CouplingArrays.from_params(initial.system_params, initial.env_params, initial.lambdas, convention)
    y0 = initial.to_vector()[None, :]
    log_debug(
        f"[integrate] {representation.value} N={initial.n_env} method={cfg.method.value} "
        f"dt={cfg.dt} t_final={cfg.t_final} convention={convention.value}"
    )
    times, samples = integrate_batch(y0, p, cfg, representation)
    states = samples[:, 0, :]

    energies = energy_batch(states, p, representation)
    drift = float(np.max(np.abs(energies - energies[0])) / max(1.0, abs(energies[0])))
    norm_drift = 0.0
    if representation is Representation.AMPLITUDE:
        norm_drift = float(np.max(np.abs(norms_batch(states) - 1.0)))
    log_debug(f"[integrate] energy drift={drift:.3e} norm drift={norm_drift:.3e}")

    return Trajectory(
        times=times,
        states=states,
        representation=representation,
        initial=initial,
        convention=convention,
        energies=energies,
        conserved_energy_drift=drift,
        norm_drift=norm_drift,
    )


def cross_formalism_check(
    initial: SystemEnvState,
    cfg: IntegratorConfig,
    convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT,
) -> float:
    """고전/진폭 두 표현의 max_t |Z_classical(t) - Z_amplitude(t)|."""
    classical = integrate(initial, cfg, convention)
    amplitude = integrate(amplitude_env_from_classical(initial), cfg, convention)
    deviation = float(np.max(np.abs(classical.Z - amplitude.Z)))
    log_info(
        f"[cross_formalism_check] N={initial.n_env} convention={CouplingConvention.parse(convention).value} "
        f"max |dZ| = {deviation:.3e}"
    )
    return deviation


def estimate_angular_frequency(times: np.ndarray, series: np.ndarray) -> float:
    """
    도함수의 영점 교차 시각 t_k 를 선형보간으로 구하고 t_k = t_0 + k pi / omega 에 직선 맞춤.
    도함수는 평균이 0이므로 오프셋이 있는 진동에도 그대로 쓸 수 있다.
    """
    times = np.asarray(times, dtype=float)
    derivative = np.gradient(np.asarray(series, dtype=float), times)
    sign = np.signbit(derivative)
    idx = np.nonzero(sign[1:] != sign[:-1])[0]
    if idx.size < 3:
        raise DomainError(f"need at least 3 derivative zero crossings to estimate a frequency (found {idx.size})")
    d0, d1 = derivative[idx], derivative[idx + 1]
    crossings = times[idx] + (times[idx + 1] - times[idx]) * d0 / (d0 - d1)
    slope, _ = np.polyfit(np.arange(crossings.size, dtype=float), crossings, 1)
    return math.pi / slope
