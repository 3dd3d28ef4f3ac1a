"""
파일명: src/chiralenv/potentials.py
목적: 패리티 위반 상호작용 후보의 물리 단위 평가
기능:
  - weak_charge: Q_W = (1 - 4 sin^2 theta_W) Z - N
  - i_integral / i_integral_with_error: 전자 루프 적분 I(r), x = cosh u 치환 후 scipy.integrate.quad
  - vacpol_longrange: Z0-광자 혼합 진공편극의 장거리 항 반경 프로파일
  - vacpol_contact_weight / nc_contact_weight: 접촉항의 델타 가중 계수
  - axion_potential: 액시온 교환 포텐셜의 sigma_e . r_hat 계수
  - classify_chirality: (P, T) 부호로 진짜/가짜 키랄성 판정
설명:
  - 자연단위 hbar = c = 1, 에너지 MeV. 길이 r 은 1/m_e 단위(rho = m_e r)로 받는다.
  - 스핀/감마5 구조는 평가하지 않고 반경 스칼라 프로파일만 계산한다.
변경이력:
  - 2026-10-19: 최초 구현
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Tuple

from scipy.integrate import quad

from chiralenv.errors import DomainError
from common.logger import log_debug, log_warn

# 적분 상한: x_max = 1 + X_CUTOFF_SCALE / rho 에서 피적분 함수는 e^{-2 rho} 대비 e^{-80}
X_CUTOFF_SCALE = 40.0
DEFAULT_REL_TOL = 1e-10


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"


class TimeReversal(str, Enum):
    EVEN = "even"
    ODD = "odd"


class Chirality(str, Enum):
    TRULY_CHIRAL = "truly_chiral"
    FALSELY_CHIRAL = "falsely_chiral"
    ACHIRAL = "achiral"


@dataclass(frozen=True)
class SymmetrySignature:
    parity: Parity
    time_reversal: TimeReversal

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity(self.parity))
        object.__setattr__(self, "time_reversal", TimeReversal(self.time_reversal))


NEUTRAL_CURRENT_SIGNATURE = SymmetrySignature(Parity.ODD, TimeReversal.EVEN)
AXION_SIGNATURE = SymmetrySignature(Parity.ODD, TimeReversal.ODD)
VACUUM_POLARIZATION_SIGNATURE = SymmetrySignature(Parity.ODD, TimeReversal.EVEN)


@dataclass(frozen=True)
class PotentialParams:
    """
    G_F [MeV^-2], m_e / m_phi [MeV], 결합상수와 alpha 는 무차원.
    기본값은 CODATA/PDG 물리 상수, 핵은 수소(Z=1, N=0).
    """

    G_F: float = 1.1663787e-11
    sin2_theta_W: float = 0.23122
    Z_protons: int = 1
    N_neutrons: int = 0
    m_e: float = 0.51099895
    m_phi: float = 0.0
    g_s_N: float = 1.0
    g_p_e: float = 1.0
    alpha: float = 1.0 / 137.035999084

    def __post_init__(self):
        for name in ("G_F", "m_e", "m_phi", "alpha", "g_s_N", "g_p_e"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"potential.{name} must be finite (got {value})")
        if self.m_e <= 0:
            raise DomainError(f"potential.m_e must be > 0 (got {self.m_e})")
        if self.m_phi < 0:
            raise DomainError(f"potential.m_phi must be >= 0 (got {self.m_phi})")
        if not (0.0 < self.sin2_theta_W < 1.0):
            raise DomainError(f"potential.sin2_theta_W must lie in (0, 1) (got {self.sin2_theta_W})")
        for name in ("Z_protons", "N_neutrons"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"potential.{name} must be a non-negative integer (got {value})")
            object.__setattr__(self, name, int(value))

    @classmethod
    def physical(cls, **overrides) -> "PotentialParams":
        return replace(cls(), **overrides)

    def as_dict(self) -> dict:
        return {
            "G_F": self.G_F,
            "sin2_theta_W": self.sin2_theta_W,
            "Z_protons": self.Z_protons,
            "N_neutrons": self.N_neutrons,
            "m_e": self.m_e,
            "m_phi": self.m_phi,
            "g_s_N": self.g_s_N,
            "g_p_e": self.g_p_e,
            "alpha": self.alpha,
        }


def _check_radius(r: float) -> None:
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"radius must be a positive finite number (got {r})")


def weak_charge(Z: int, N: int, sin2_theta_W: float) -> float:
    if Z < 0 or N < 0:
        raise DomainError(f"proton and neutron numbers must be >= 0 (got Z={Z}, N={N})")
    return (1.0 - 4.0 * sin2_theta_W) * Z - N


def _tail_bound(rho: float, x_cut: float) -> float:
    """int_{x_cut}^inf (x + 1/2) e^{-2 rho x} dx, 피적분 함수의 상계 적분 (e^{-2 rho} 인수 제외)."""
    return math.exp(-2.0 * rho * (x_cut - 1.0)) * ((x_cut + 0.5) / (2.0 * rho) + 1.0 / (4.0 * rho * rho))


def i_integral_with_error(r: float, rel_tol: float = DEFAULT_REL_TOL) -> Tuple[float, float]:
    """
    I(r) = int_1^inf e^{-2 x rho} sqrt(x^2 - 1) (1 + 1/(2 x^2)) dx,  rho = m_e r.

    x = cosh u 로 치환하면 sqrt(x^2 - 1) dx = sinh^2 u du 가 되어 끝점이 매끄럽다.
    지수 e^{-2 rho} 는 밖으로 빼서 큰 rho 에서도 상대오차로 적분한다.

    Returns:
        (값, 오차 추정) 오차 추정 = quad 추정 + 절단 꼬리 상계
    """
    _check_radius(r)
    rho = float(r)
    x_cut = 1.0 + X_CUTOFF_SCALE / rho
    u_max = math.acosh(x_cut)

    def integrand(u: float) -> float:
        c = math.cosh(u)
        s = math.sinh(u)
        return math.exp(-2.0 * rho * (c - 1.0)) * s * s * (1.0 + 0.5 / (c * c))

    value, abserr = quad(integrand, 0.0, u_max, epsabs=0.0, epsrel=rel_tol, limit=200)
    scale = math.exp(-2.0 * rho)
    err = (abserr + _tail_bound(rho, x_cut)) * scale
    value *= scale
    if value > 0 and err > 100 * rel_tol * value:
        log_warn(f"[i_integral_with_error] r={r}: error estimate {err:.3e} exceeds requested tolerance")
    log_debug(f"[i_integral_with_error] r={r} I={value:.17g} err={err:.3e}")
    return value, err


def i_integral(r: float) -> float:
    return i_integral_with_error(r)[0]


def vacpol_longrange(r: float, params: PotentialParams) -> float:
    """
    (G/(2 sqrt 2)) Z 2 alpha (1 - 4 sin^2 theta_W) m_e^2 / (3 pi^2 r) I(r)  [MeV]
    r 는 1/m_e 단위이므로 물리 거리 r/m_e 로 환산한다.
    """
    _check_radius(r)
    factor = 1.0 - 4.0 * params.sin2_theta_W
    if params.Z_protons == 0 or factor == 0.0:
        return 0.0
    r_phys = r / params.m_e
    prefactor = params.G_F / (2.0 * math.sqrt(2.0))
    radial = 2.0 * params.alpha * factor * params.m_e ** 2 / (3.0 * math.pi ** 2 * r_phys)
    return prefactor * params.Z_protons * radial * i_integral(r)


def vacpol_contact_weight(params: PotentialParams) -> float:
    """접촉항 -Q_W rho(r) 의 계수 (G/(2 sqrt 2)) (-Q_W) [MeV^-2]. rho(r) 는 모델링하지 않는다."""
    q_w = weak_charge(params.Z_protons, params.N_neutrons, params.sin2_theta_W)
    return params.G_F / (2.0 * math.sqrt(2.0)) * (-q_w)


def nc_contact_weight(params: PotentialParams) -> float:
    """약한 중성류 H_NC 의 계수 (G_F/(2 sqrt 2)) Q_W [MeV^-2]."""
    q_w = weak_charge(params.Z_protons, params.N_neutrons, params.sin2_theta_W)
    return params.G_F / (2.0 * math.sqrt(2.0)) * q_w


def axion_potential(r: float, params: PotentialParams) -> float:
    """(g_s g_p)/(8 pi m_e) (m_phi/r + 1/r^2) e^{-m_phi r} [MeV], r 는 1/m_e 단위."""
    _check_radius(r)
    r_phys = r / params.m_e
    coupling = params.g_s_N * params.g_p_e / (8.0 * math.pi * params.m_e)
    return coupling * (params.m_phi / r_phys + 1.0 / r_phys ** 2) * math.exp(-params.m_phi * r_phys)


def classify_chirality(sig: SymmetrySignature) -> Chirality:
    """P 홀 + T 짝 -> 진짜 키랄 (PVED 가능), P 홀 + T 홀 -> 가짜 키랄, P 짝 -> 비키랄."""
    if sig.parity is Parity.EVEN:
        return Chirality.ACHIRAL
    if sig.time_reversal is TimeReversal.EVEN:
        return Chirality.TRULY_CHIRAL
    return Chirality.FALSELY_CHIRAL
