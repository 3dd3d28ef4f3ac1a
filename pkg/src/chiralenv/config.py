"""
파일명: src/chiralenv/config.py
목적: 실행 설정(RunConfig) 스키마 검증, 기본값 병합, CLI 플래그 덮어쓰기
기능:
  - YAML 섹션 system / environment / coupling / integrator / ensemble / output / potential
  - 알 수 없는 섹션/키, 잘못된 타입은 ConfigError (점 표기 키 경로 포함)
  - 우선순위: CLI 플래그 > 설정 파일 > 기본값
  - 해석된 설정의 평문 딕셔너리와 SHA-256 해시 (출력 메타데이터, provenance 기록용)
전제조건:
  - 파일 로드와 ${VAR} 치환은 common.load_config 가 담당
변경이력:
  - 2026-10-19: 최초 구현
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from chiralenv.core import CouplingConvention, MoleculeState, TwoLevelParams
from chiralenv.dynamics import IntegratorConfig, IntegratorMethod, Representation
from chiralenv.ensemble import EnsembleConfig, EnvSampling, SystemSampling, build_initial_state
from chiralenv.errors import ConfigError, DomainError
from chiralenv.potentials import PotentialParams
from common.load_config import load_config
from common.logger import log_debug

FLOAT = "float"
INT = "int"
BOOL = "bool"
STR = "str"
PAIR = "pair"
OPTIONAL_PAIR = "optional_pair"

# 섹션 -> 키 -> (타입, 기본값, 허용값)
SCHEMA: Dict[str, Dict[str, Tuple[str, Any, Optional[Tuple[str, ...]]]]] = {
    "system": {
        "z0": (FLOAT, 1.0, None),
        "phi0": (FLOAT, 0.0, None),
        "delta": (FLOAT, 1.0, None),
        "epsilon": (FLOAT, 0.0, None),
        "sampling": (STR, "fixed", tuple(s.value for s in SystemSampling)),
    },
    "environment": {
        "n_env": (INT, 10, None),
        "delta": (FLOAT, 1.0, None),
        "epsilon": (FLOAT, 0.0, None),
        "z_range": (PAIR, [-1.0, 1.0], None),
        "phi_range": (PAIR, [0.0, 2.0 * math.pi], None),
    },
    "coupling": {
        "lambda": (FLOAT, 1.0, None),
        "convention": (STR, "hamiltonian_consistent", ("hamiltonian", "paper") + tuple(c.value for c in CouplingConvention)),
    },
    "integrator": {
        "method": (STR, "rk4_fixed", tuple(m.value for m in IntegratorMethod)),
        "representation": (STR, "amplitude", tuple(r.value for r in Representation)),
        "dt": (FLOAT, 1e-3, None),
        "t_final": (FLOAT, 20.0, None),
        "abs_tol": (FLOAT, 1e-10, None),
        "rel_tol": (FLOAT, 1e-10, None),
        "record_stride": (INT, 10, None),
    },
    "ensemble": {
        "n_realizations": (INT, 2000, None),
        "master_seed": (INT, 0, None),
        "window": (OPTIONAL_PAIR, None, None),
        "chunk_size": (INT, 500, None),
        "workers": (INT, 1, None),
    },
    "output": {
        "dir": (STR, "results", None),
        "plot_script": (BOOL, True, None),
    },
    "potential": {
        "G_F": (FLOAT, 1.1663787e-11, None),
        "sin2_theta_W": (FLOAT, 0.23122, None),
        "Z_protons": (INT, 1, None),
        "N_neutrons": (INT, 0, None),
        "m_e": (FLOAT, 0.51099895, None),
        "m_phi": (FLOAT, 0.0, None),
        "g_s_N": (FLOAT, 1.0, None),
        "g_p_e": (FLOAT, 1.0, None),
        "alpha": (FLOAT, 1.0 / 137.035999084, None),
        "r_min": (FLOAT, 0.1, None),
        "r_max": (FLOAT, 5.0, None),
        "r_points": (INT, 50, None),
    },
}

# 실행 환경에만 영향을 주고 결과는 바꾸지 않는 키. 메타데이터와 해시에서 제외한다.
RUNTIME_KEYS = {("ensemble", "workers"), ("output", "dir"), ("output", "plot_script")}


def _coerce(value: Any, kind: str, key: str) -> Any:
    if kind == FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key)
        return float(value)
    if kind == INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key)
        return int(value)
    if kind == BOOL:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", key)
        return value
    if kind == STR:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key)
        return value.strip()
    if kind in (PAIR, OPTIONAL_PAIR):
        if value is None and kind == OPTIONAL_PAIR:
            return None
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"expected a two-element list [low, high], got {value!r}", key)
        return [_coerce(v, FLOAT, key) for v in value]
    raise ConfigError(f"unsupported schema type {kind}", key)


@dataclass(frozen=True)
class RunConfig:
    """검증이 끝난 섹션별 값. values[section][key]."""

    values: Dict[str, Dict[str, Any]]
    source: Optional[str] = None

    # ------------------------------------------------------------------
    # 생성
    # ------------------------------------------------------------------
    @classmethod
    def defaults(cls) -> "RunConfig":
        return cls({section: {k: copy.deepcopy(spec[1]) for k, spec in keys.items()} for section, keys in SCHEMA.items()})

    @classmethod
    def from_mapping(cls, data: Optional[Dict[str, Any]], source: Optional[str] = None) -> "RunConfig":
        """기본값 위에 매핑을 병합. 알 수 없는 섹션/키는 ConfigError."""
        merged = cls.defaults().values
        for section, body in (data or {}).items():
            if section not in SCHEMA:
                raise ConfigError("unknown section", str(section))
            if body is None:
                continue
            if not isinstance(body, dict):
                raise ConfigError(f"section must be a mapping, got {type(body).__name__}", section)
            for key, value in body.items():
                dotted = f"{section}.{key}"
                if key not in SCHEMA[section]:
                    raise ConfigError("unknown key", dotted)
                merged[section][key] = cls._check(section, key, value)
        config = cls(merged, source)
        config.validate()
        return config

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "RunConfig":
        if path is None:
            return cls.from_mapping({})
        try:
            data = load_config(path)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from None
        except ValueError as e:
            raise ConfigError(str(e)) from None
        log_debug(f"[RunConfig.load] {path}: sections={sorted(data)}")
        return cls.from_mapping(data, source=str(path))

    @staticmethod
    def _check(section: str, key: str, value: Any) -> Any:
        kind, _, choices = SCHEMA[section][key]
        dotted = f"{section}.{key}"
        coerced = _coerce(value, kind, dotted)
        if choices is not None and coerced not in choices:
            raise ConfigError(f"must be one of {', '.join(choices)} (got {coerced!r})", dotted)
        if dotted == "coupling.convention":
            coerced = CouplingConvention.parse(coerced).value
        return coerced

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """{'section.key': value}, None 값은 무시 (지정되지 않은 플래그)."""
        merged = copy.deepcopy(self.values)
        for dotted, value in overrides.items():
            if value is None:
                continue
            section, _, key = dotted.partition(".")
            if section not in SCHEMA or key not in SCHEMA[section]:
                raise ConfigError("unknown key", dotted)
            merged[section][key] = self._check(section, key, value)
        config = RunConfig(merged, self.source)
        config.validate()
        return config

    # ------------------------------------------------------------------
    # 검증 / 직렬화
    # ------------------------------------------------------------------
    def validate(self) -> None:
        """도메인 객체를 한 번씩 만들어 본다. DomainError 는 해당 섹션 이름으로 ConfigError 변환."""
        for section, build in (
            ("integrator", self.integrator_config),
            ("ensemble", self.ensemble_config),
            ("potential", self.potential_params),
        ):
            try:
                build()
            except DomainError as e:
                raise ConfigError(str(e), section) from None
        if self.values["ensemble"]["workers"] < 1:
            raise ConfigError("must be >= 1", "ensemble.workers")
        pot = self.values["potential"]
        if not (0 < pot["r_min"] < pot["r_max"]) or pot["r_points"] < 2:
            raise ConfigError("radial grid needs 0 < r_min < r_max and r_points >= 2", "potential")

    def get(self, dotted: str) -> Any:
        section, _, key = dotted.partition(".")
        return self.values[section][key]

    def resolved(self) -> Dict[str, Dict[str, Any]]:
        """결과에 영향을 주는 모든 값 (기본값 포함)."""
        return {
            section: {k: v for k, v in body.items() if (section, k) not in RUNTIME_KEYS}
            for section, body in self.values.items()
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    # ------------------------------------------------------------------
    # 도메인 객체
    # ------------------------------------------------------------------
    @property
    def convention(self) -> CouplingConvention:
        return CouplingConvention.parse(self.values["coupling"]["convention"])

    @property
    def representation(self) -> Representation:
        return Representation(self.values["integrator"]["representation"])

    @property
    def workers(self) -> int:
        return self.values["ensemble"]["workers"]

    @property
    def out_dir(self) -> Path:
        return Path(self.values["output"]["dir"])

    def integrator_config(self) -> IntegratorConfig:
        s = self.values["integrator"]
        return IntegratorConfig(
            dt=s["dt"],
            t_final=s["t_final"],
            method=IntegratorMethod(s["method"]),
            abs_tol=s["abs_tol"],
            rel_tol=s["rel_tol"],
            record_stride=s["record_stride"],
        )

    def system_params(self) -> TwoLevelParams:
        s = self.values["system"]
        return TwoLevelParams(delta=s["delta"], epsilon=s["epsilon"])

    def env_params(self) -> TwoLevelParams:
        e = self.values["environment"]
        return TwoLevelParams(delta=e["delta"], epsilon=e["epsilon"])

    def ensemble_config(self) -> EnsembleConfig:
        s, e, c, en = (self.values[k] for k in ("system", "environment", "coupling", "ensemble"))
        window = en["window"]
        return EnsembleConfig(
            n_realizations=en["n_realizations"],
            n_env=e["n_env"],
            master_seed=en["master_seed"],
            system_init=MoleculeState(s["z0"], s["phi0"]),
            system_sampling=SystemSampling(s["sampling"]),
            env_sampling=EnvSampling(e["z_range"][0], e["z_range"][1], e["phi_range"][0], e["phi_range"][1]),
            system_params=self.system_params(),
            env_params=self.env_params(),
            lam=c["lambda"],
            integrator=self.integrator_config(),
            convention=self.convention,
            time_average_window=tuple(window) if window is not None else None,
            representation=self.representation,
            chunk_size=en["chunk_size"],
        )

    def initial_state(self):
        """단일 궤적용 초기 상태: 환경은 master_seed 의 realization 0 에서 추출."""
        return build_initial_state(self.ensemble_config(), 0)

    def potential_params(self) -> PotentialParams:
        p = self.values["potential"]
        return PotentialParams(
            G_F=p["G_F"],
            sin2_theta_W=p["sin2_theta_W"],
            Z_protons=p["Z_protons"],
            N_neutrons=p["N_neutrons"],
            m_e=p["m_e"],
            m_phi=p["m_phi"],
            g_s_N=p["g_s_N"],
            g_p_e=p["g_p_e"],
            alpha=p["alpha"],
        )
