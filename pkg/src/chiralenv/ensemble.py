"""
파일명: src/chiralenv/ensemble.py
목적: 환경 초기조건 난수 샘플링, realization 병렬 실행, <Z(t)>_n 평균과 <Z>_t 시간평균
기능:
  - sample_env_initial: (master_seed, index) 로 결정되는 realization별 생성기에서 z_i(0), phi_i(0) 추출
  - run_ensemble: 고정 크기 청크 단위로 적분 (workers > 1 이면 ProcessPoolExecutor), index 순서로 집계
  - time_average: 구간 [t_lo, t_hi] 사다리꼴 평균 (구간 끝점은 선형보간)
  - envelope_decay: 마지막 1/4 구간 진폭 / 처음 1/4 구간 진폭
  - convergence_study: 누적 realization 의 접두 평균과 표준오차
설명:
  - 청크 경계는 chunk_size 로만 정해지고 workers 와 무관하다. 같은 설정이면 결과가 비트 단위로 같다.
  - 앙상블은 궤적 전체가 아니라 중심 분자 Z 만 기록한다.
변경이력:
  - 2026-10-19: 최초 구현
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from chiralenv import __version__
from chiralenv.core import (
    TWO_PI,
    AmplitudeSystemEnvState,
    CouplingConvention,
    MoleculeState,
    SystemEnvState,
    TwoLevelParams,
    amplitude_env_from_classical,
)
from chiralenv.dynamics import (
    CouplingArrays,
    IntegratorConfig,
    IntegratorMethod,
    Representation,
    integrate_batch,
    system_z_batch,
)
from chiralenv.errors import ChiralEnvError, DomainError, RealizationError, SingularityError
from common.logger import log_debug, log_error, log_info

DEFAULT_CHUNK_SIZE = 500


class SystemSampling(str, Enum):
    FIXED = "fixed"
    UNIFORM = "uniform"
    RACEMIC = "racemic"


@dataclass(frozen=True)
class EnvSampling:
    """z_i(0) ~ U(z_low, z_high) (양 끝 제외), phi_i(0) ~ U[phi_low, phi_high)."""

    z_low: float = -1.0
    z_high: float = 1.0
    phi_low: float = 0.0
    phi_high: float = TWO_PI

    def __post_init__(self):
        if not (-1.0 <= self.z_low < self.z_high <= 1.0):
            raise DomainError(f"environment z range must satisfy -1 <= low < high <= 1 (got {self.z_low}, {self.z_high})")
        if not (self.phi_low < self.phi_high):
            raise DomainError(f"environment phi range is empty (got {self.phi_low}, {self.phi_high})")


@dataclass(frozen=True)
class EnsembleConfig:
    n_realizations: int = 2000
    n_env: int = 10
    master_seed: int = 0
    system_init: MoleculeState = MoleculeState(1.0, 0.0)
    system_sampling: SystemSampling = SystemSampling.FIXED
    env_sampling: EnvSampling = EnvSampling()
    system_params: TwoLevelParams = TwoLevelParams(delta=1.0, epsilon=0.0)
    env_params: TwoLevelParams = TwoLevelParams(delta=1.0, epsilon=0.0)
    lam: float = 1.0
    integrator: IntegratorConfig = IntegratorConfig(dt=1e-3, t_final=20.0, record_stride=10)
    convention: CouplingConvention = CouplingConvention.HAMILTONIAN_CONSISTENT
    time_average_window: Optional[Tuple[float, float]] = None
    representation: Representation = Representation.AMPLITUDE
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        object.__setattr__(self, "system_sampling", SystemSampling(self.system_sampling))
        object.__setattr__(self, "representation", Representation(self.representation))
        object.__setattr__(self, "convention", CouplingConvention.parse(self.convention))
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise DomainError(f"ensemble.n_realizations must be an integer >= 1 (got {self.n_realizations})")
        if int(self.n_env) != self.n_env or self.n_env < 0:
            raise DomainError(f"ensemble.n_env must be an integer >= 0 (got {self.n_env})")
        if not (0 <= int(self.master_seed) < 2 ** 64):
            raise DomainError(f"ensemble.master_seed must be an unsigned 64-bit integer (got {self.master_seed})")
        if int(self.chunk_size) != self.chunk_size or self.chunk_size < 1:
            raise DomainError(f"ensemble.chunk_size must be an integer >= 1 (got {self.chunk_size})")
        if not math.isfinite(self.lam):
            raise DomainError(f"coupling.lambda must be finite (got {self.lam})")
        t_lo, t_hi = self.window
        if not (0.0 <= t_lo < t_hi <= self.integrator.t_final + 1e-12):
            raise DomainError(
                f"time_average_window must satisfy 0 <= t_lo < t_hi <= t_final (got [{t_lo}, {t_hi}], "
                f"t_final={self.integrator.t_final})"
            )

    @property
    def window(self) -> Tuple[float, float]:
        if self.time_average_window is None:
            return 0.0, float(self.integrator.t_final)
        lo, hi = self.time_average_window
        return float(lo), float(hi)

    def as_dict(self) -> Dict:
        """메타데이터용 평문 딕셔너리 (enum 은 값, tuple 은 list)."""
        plain = _plain(asdict(self))
        plain["time_average_window"] = list(self.window)
        return plain


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean_Z: np.ndarray
    std_Z: np.ndarray
    time_avg_Z: float
    envelope_decay: float
    std_error: float
    per_realization_time_avg: np.ndarray
    n_realizations: int
    window: Tuple[float, float]
    metadata: Dict = field(default_factory=dict)

    def summary(self) -> Dict:
        return {
            "time_avg_Z": self.time_avg_Z,
            "std_error": self.std_error,
            "envelope_decay": self.envelope_decay,
            "n_realizations": self.n_realizations,
            "window": list(self.window),
        }


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    time_avg_Z: float
    std_error: float


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# 샘플링
# ---------------------------------------------------------------------------

def realization_rng(master_seed: int, index: int) -> np.random.Generator:
    """(master_seed, index) 로만 결정되는 생성기. 실행 순서, 프로세스 수와 무관."""
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)))


def _draw(cfg: EnsembleConfig, index: int) -> Tuple[MoleculeState, List[MoleculeState]]:
    rng = realization_rng(cfg.master_seed, index)
    s = cfg.env_sampling
    # uniform 은 [low, high) 이므로 하한을 한 ulp 올려 열린 구간으로 만든다
    z_low = np.nextafter(s.z_low, np.inf) if s.z_low == -1.0 else s.z_low
    z = rng.uniform(z_low, s.z_high, size=cfg.n_env)
    phi = rng.uniform(s.phi_low, s.phi_high, size=cfg.n_env)
    env = [MoleculeState(float(zi), float(pi)) for zi, pi in zip(z, phi)]
    if cfg.system_sampling is SystemSampling.UNIFORM:
        system = MoleculeState(
            float(rng.uniform(np.nextafter(-1.0, np.inf), 1.0)),
            float(rng.uniform(0.0, TWO_PI)),
        )
    else:
        system = cfg.system_init
    return system, env


def sample_initial(cfg: EnsembleConfig, realization_index: int) -> Tuple[MoleculeState, List[MoleculeState]]:
    """(system, env) 초기 상태. racemic 모드에서 홀수 index 는 직전 짝수 index 의 거울상."""
    if not (0 <= realization_index < cfg.n_realizations):
        raise DomainError(f"realization index {realization_index} out of range [0, {cfg.n_realizations})")
    if cfg.system_sampling is SystemSampling.RACEMIC and realization_index % 2 == 1:
        system, env = _draw(cfg, realization_index - 1)
        return system.mirrored(), [m.mirrored() for m in env]
    return _draw(cfg, realization_index)


def sample_env_initial(cfg: EnsembleConfig, realization_index: int) -> List[MoleculeState]:
    return sample_initial(cfg, realization_index)[1]


def build_initial_state(cfg: EnsembleConfig, realization_index: int):
    """realization 하나의 전체 초기 상태 (설정된 표현으로)."""
    system, env = sample_initial(cfg, realization_index)
    state = SystemEnvState(
        system,
        cfg.system_params,
        tuple(env),
        (cfg.env_params,) * cfg.n_env,
        (cfg.lam,) * cfg.n_env,
    )
    if cfg.representation is Representation.AMPLITUDE:
        return amplitude_env_from_classical(state)
    return state


# ---------------------------------------------------------------------------
# 시간 평균 및 감쇠 지표
# ---------------------------------------------------------------------------

def _window_slice(times: np.ndarray, series: np.ndarray, window: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    t_lo, t_hi = window
    tol = 1e-9 * max(1.0, abs(times[-1]))
    if not (t_lo < t_hi):
        raise DomainError(f"empty time-average window [{t_lo}, {t_hi}]")
    if t_lo < times[0] - tol or t_hi > times[-1] + tol:
        raise DomainError(f"window [{t_lo}, {t_hi}] lies outside the sampled range [{times[0]}, {times[-1]}]")
    t_lo = max(t_lo, float(times[0]))
    t_hi = min(t_hi, float(times[-1]))
    inside = (times > t_lo) & (times < t_hi)
    t = np.concatenate(([t_lo], times[inside], [t_hi]))
    y = np.concatenate(([np.interp(t_lo, times, series)], series[inside], [np.interp(t_hi, times, series)]))
    return t, y


def time_average(times: Sequence[float], series: Sequence[float], window: Tuple[float, float]) -> float:
    """[t_lo, t_hi] 사다리꼴 평균."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if times.size < 2 or times.size != series.size:
        raise DomainError("time average needs at least two samples with matching lengths")
    t, y = _window_slice(times, series, window)
    area = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))
    return float(area / (t[-1] - t[0]))


def envelope_decay(times: Sequence[float], series: Sequence[float], window: Tuple[float, float]) -> float:
    """(max - min)/2 를 마지막 1/4 와 처음 1/4 에서 비교. 처음 진폭이 0 이면 1.0."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    t, y = _window_slice(times, series, window)
    quarter = (t[-1] - t[0]) / 4.0
    first = y[t <= t[0] + quarter]
    last = y[t >= t[-1] - quarter]
    first_amp = 0.5 * (first.max() - first.min())
    last_amp = 0.5 * (last.max() - last.min())
    if first_amp == 0.0:
        return 1.0
    return float(last_amp / first_amp)


# ---------------------------------------------------------------------------
# 실행
# ---------------------------------------------------------------------------

def _chunk_bounds(n: int, chunk_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def _integrate_rows(cfg: EnsembleConfig, states: list, start: int) -> Tuple[np.ndarray, np.ndarray]:
    p = CouplingArrays.from_params(
        cfg.system_params, (cfg.env_params,) * cfg.n_env, (cfg.lam,) * cfg.n_env, cfg.convention
    )
    rep = cfg.representation

    def observe(y: np.ndarray) -> np.ndarray:
        return system_z_batch(y, rep)

    if cfg.integrator.method is IntegratorMethod.RK4_FIXED:
        y0 = np.stack([s.to_vector() for s in states])
        try:
            return integrate_batch(y0, p, cfg.integrator, rep, observe)
        except SingularityError as e:
            raise RealizationError(start + e.row, cfg.master_seed, e) from None

    # 적응 스텝은 realization마다 따로 (스텝 선택이 행끼리 섞이지 않게)
    columns = []
    times = None
    for k, s in enumerate(states):
        try:
            times, z = integrate_batch(s.to_vector()[None, :], p, cfg.integrator, rep, observe)
        except ChiralEnvError as e:
            raise RealizationError(start + k, cfg.master_seed, e) from None
        columns.append(z[:, 0])
    return times, np.stack(columns, axis=1)


def _run_chunk(args: Tuple[EnsembleConfig, int, int]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    realization [start, stop) 을 적분한다.

    Returns:
        (times, Z (T, B), 행별 시간평균 (B,))
    """
    cfg, start, stop = args
    states = [build_initial_state(cfg, i) for i in range(start, stop)]
    times, z = _integrate_rows(cfg, states, start)
    window = cfg.window
    averages = np.array([time_average(times, z[:, b], window) for b in range(z.shape[1])])
    return times, z, averages


def run_ensemble(cfg: EnsembleConfig, workers: int = 1) -> EnsembleResult:
    """
    n_realizations 개 궤적의 pointwise 평균. workers 는 결과에 영향을 주지 않는다.

    Raises:
        RealizationError: 어떤 realization 이든 적분 실패 시 (index, master_seed 포함)
    """
    if workers < 1:
        raise DomainError(f"workers must be >= 1 (got {workers})")
    bounds = _chunk_bounds(cfg.n_realizations, cfg.chunk_size)
    tasks = [(cfg, start, stop) for start, stop in bounds]
    log_info(
        f"[run_ensemble] n={cfg.n_realizations} N={cfg.n_env} seed={cfg.master_seed} "
        f"chunks={len(tasks)} workers={workers} representation={cfg.representation.value} "
        f"convention={cfg.convention.value}"
    )

    try:
        if workers == 1 or len(tasks) == 1:
            chunks = [_run_chunk(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
                chunks = list(pool.map(_run_chunk, tasks))
    except RealizationError as e:
        log_error(f"[run_ensemble] {e}")
        raise

    times = chunks[0][0]
    # Welford, realization index 순서
    count = 0
    mean = np.zeros_like(times)
    m2 = np.zeros_like(times)
    averages: List[float] = []
    for _, z, avg in chunks:
        for b in range(z.shape[1]):
            count += 1
            delta = z[:, b] - mean
            mean = mean + delta / count
            m2 = m2 + delta * (z[:, b] - mean)
        averages.extend(avg.tolist())

    per_real = np.array(averages)
    std = np.sqrt(np.maximum(m2 / (count - 1), 0.0)) if count > 1 else np.zeros_like(mean)
    mean = np.clip(mean, -1.0, 1.0)
    std_error = float(np.std(per_real, ddof=1) / math.sqrt(count)) if count > 1 else 0.0

    window = cfg.window
    result = EnsembleResult(
        times=times,
        mean_Z=mean,
        std_Z=std,
        time_avg_Z=time_average(times, mean, window),
        envelope_decay=envelope_decay(times, mean, window),
        std_error=std_error,
        per_realization_time_avg=per_real,
        n_realizations=count,
        window=window,
        metadata={
            "config": cfg.as_dict(),
            "master_seed": int(cfg.master_seed),
            "convention": cfg.convention.value,
            "version": __version__,
        },
    )
    log_info(
        f"[run_ensemble] <Z>_t={result.time_avg_Z:.6f} +- {result.std_error:.6f} "
        f"envelope_decay={result.envelope_decay:.4f}"
    )
    return result


def convergence_study(cfg: EnsembleConfig, n_list: Sequence[int], workers: int = 1) -> List[ConvergenceRow]:
    """max(n_list) 개를 한 번 실행하고 접두 부분으로 각 n 의 추정치를 만든다."""
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 1 for n in n_list):
        raise DomainError(f"n_list must hold positive integers (got {n_list})")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError(f"n_list must be strictly ascending (got {n_list})")

    result = run_ensemble(replace(cfg, n_realizations=n_list[-1]), workers=workers)
    rows = []
    for n in n_list:
        prefix = result.per_realization_time_avg[:n]
        std_error = float(np.std(prefix, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        rows.append(ConvergenceRow(n=n, time_avg_Z=float(np.mean(prefix)), std_error=std_error))
        log_debug(f"[convergence_study] n={n} <Z>_t={rows[-1].time_avg_Z:.6f} se={std_error:.6f}")
    return rows
