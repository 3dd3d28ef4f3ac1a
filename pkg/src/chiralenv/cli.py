#!/usr/bin/env python3
"""
파일명: src/chiralenv/cli.py
목적: 시뮬레이션 명령행 진입점 (typer)
명령:
  - simulate          단일 궤적 CSV  (t,Z,Phi,z_1,phi_1,...,H_total)
  - ensemble          <Z(t)>_n CSV + JSON 요약 + 플롯 스크립트
  - reproduce-fig3    환경 eps_i = 0 / 50 비교, 선택적 격자 스윕, 판정 실패 시 exit 4
  - convergence       n 별 접두 평균과 표준오차 CSV
  - spectrum          중심/환경 분자 에너지 분리 JSON
  - potential ...     i-integral / vacpol / axion / weak-charge
  - classify          (P, T) 대칭으로 키랄성 판정
종료 코드:
  - 0 성공, 2 설정/입력 오류, 3 수치 실패, 4 재현 판정 실패
변경이력:
  - 2026-10-19: 최초 구현
"""

# Standard library imports
import functools
from pathlib import Path
from typing import Any, Dict, List, Optional

# Third-party imports
import numpy as np
import pandas as pd
import typer

# Local imports
from chiralenv import __version__
from chiralenv.config import RunConfig
from chiralenv.core import TwoLevelParams
from chiralenv.dynamics import integrate
from chiralenv.ensemble import EnsembleResult, convergence_study, run_ensemble
from chiralenv.errors import ConfigError, DomainError, NumericalError
from chiralenv.potentials import (
    AXION_SIGNATURE,
    NEUTRAL_CURRENT_SIGNATURE,
    VACUUM_POLARIZATION_SIGNATURE,
    Parity,
    SymmetrySignature,
    TimeReversal,
    axion_potential,
    classify_chirality,
    i_integral_with_error,
    nc_contact_weight,
    vacpol_contact_weight,
    vacpol_longrange,
    weak_charge,
)
from chiralenv.reproduction import reproduce
from chiralenv.spectra import environment_split, system_split
from common.csv_io import dump_json, render_template, write_csv, write_json
from common.logger import log_error, log_info, run_record

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

PLOT_TEMPLATE = "plot/plot_mean_z.py.tmpl"

app = typer.Typer(help="키랄 분자 계+환경 모델 시뮬레이션", no_args_is_help=True)
potential_app = typer.Typer(help="패리티 위반 포텐셜 평가 (자연단위, MeV, r 은 1/m_e 단위)", no_args_is_help=True)
app.add_typer(potential_app, name="potential")

INTERACTIONS = {
    "neutral-current": NEUTRAL_CURRENT_SIGNATURE,
    "axion": AXION_SIGNATURE,
    "vacuum-polarization": VACUUM_POLARIZATION_SIGNATURE,
}


# -------------------------------------------------------------
# 공통
# -------------------------------------------------------------
def _handle_errors(func):
    """도메인 예외를 종료 코드로 변환."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigError, DomainError) as e:
            log_error(f"[{func.__name__}] {type(e).__name__}: {e}")
            typer.echo(f"error: {e}", err=True)
            raise typer.Exit(EXIT_CONFIG)
        except NumericalError as e:
            log_error(f"[{func.__name__}] {type(e).__name__}: {e}")
            typer.echo(f"numerical failure: {e}", err=True)
            raise typer.Exit(EXIT_NUMERICAL)

    return wrapper


def _resolve(config: Optional[Path], overrides: Dict[str, Any]) -> RunConfig:
    """기본값 < 설정 파일 < CLI 플래그."""
    return RunConfig.load(config).with_overrides(overrides)


def _common_overrides(
    seed: Optional[int] = None,
    n: Optional[int] = None,
    n_env: Optional[int] = None,
    dt: Optional[float] = None,
    t_final: Optional[float] = None,
    convention: Optional[str] = None,
    out: Optional[Path] = None,
    workers: Optional[int] = None,
) -> Dict[str, Any]:
    return {
        "ensemble.master_seed": seed,
        "ensemble.n_realizations": n,
        "environment.n_env": n_env,
        "integrator.dt": dt,
        "integrator.t_final": t_final,
        "coupling.convention": convention,
        "output.dir": str(out) if out is not None else None,
        "ensemble.workers": workers,
    }


def _metadata(cfg: RunConfig, command: str, **extra: Any) -> Dict[str, Any]:
    """출력 파일에 넣는 메타데이터. 결과를 바꾸지 않는 실행 옵션(workers, 출력 경로)은 제외."""
    meta = {
        "command": command,
        "version": __version__,
        "config": cfg.resolved(),
        "config_hash": cfg.config_hash(),
        "master_seed": cfg.get("ensemble.master_seed"),
        "convention": cfg.convention.value,
    }
    meta.update(extra)
    return meta


def _record(command: str, cfg: Optional[RunConfig], outputs: List[Path], **extra: Any) -> None:
    detail: Dict[str, Any] = {"version": __version__, "outputs": [str(p) for p in outputs]}
    if cfg is not None:
        detail.update(
            config_hash=cfg.config_hash(),
            master_seed=cfg.get("ensemble.master_seed"),
            convention=cfg.convention.value,
            source=cfg.source,
        )
    detail.update(extra)
    run_record(command, detail)


def _ensemble_frame(result: EnsembleResult) -> pd.DataFrame:
    return pd.DataFrame({"t": result.times, "mean_Z": result.mean_Z, "std_Z": result.std_Z})


CONFIG_OPTION = typer.Option(None, "--config", help="YAML 설정 파일")
SEED_OPTION = typer.Option(None, "--seed", help="master seed (u64)")
N_OPTION = typer.Option(None, "--n", help="realization 수")
N_ENV_OPTION = typer.Option(None, "--n-env", help="환경 분자 수 N")
DT_OPTION = typer.Option(None, "--dt", help="시간 간격")
T_FINAL_OPTION = typer.Option(None, "--t-final", help="종료 시각")
CONVENTION_OPTION = typer.Option(None, "--convention", help="hamiltonian | paper")
OUT_OPTION = typer.Option(None, "--out", help="출력 디렉토리")
WORKERS_OPTION = typer.Option(None, "--workers", help="프로세스 수 (결과에는 영향 없음)")


# -------------------------------------------------------------
# 시뮬레이션
# -------------------------------------------------------------
@app.command()
@_handle_errors
def simulate(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    n_env: Optional[int] = N_ENV_OPTION,
    dt: Optional[float] = DT_OPTION,
    t_final: Optional[float] = T_FINAL_OPTION,
    convention: Optional[str] = CONVENTION_OPTION,
    out: Optional[Path] = OUT_OPTION,
):
    """단일 궤적을 적분해 trajectory.csv 저장."""
    cfg = _resolve(config, _common_overrides(seed=seed, n_env=n_env, dt=dt, t_final=t_final, convention=convention, out=out))
    trajectory = integrate(cfg.initial_state(), cfg.integrator_config(), cfg.convention)

    big_z, big_phi, z, phi = trajectory.classical_columns()
    columns: Dict[str, np.ndarray] = {"t": trajectory.times, "Z": big_z, "Phi": big_phi}
    for i in range(trajectory.n_env):
        columns[f"z_{i + 1}"] = z[:, i]
        columns[f"phi_{i + 1}"] = phi[:, i]
    columns["H_total"] = trajectory.energies

    path = write_csv(
        cfg.out_dir / "trajectory.csv",
        pd.DataFrame(columns),
        _metadata(
            cfg,
            "simulate",
            representation=trajectory.representation.value,
            conserved_energy_drift=trajectory.conserved_energy_drift,
            norm_drift=trajectory.norm_drift,
        ),
    )
    typer.echo(
        f"energy drift {trajectory.conserved_energy_drift:.3e}, norm drift {trajectory.norm_drift:.3e} "
        f"({len(trajectory.times)} samples) -> {path}"
    )
    _record("simulate", cfg, [path], conserved_energy_drift=trajectory.conserved_energy_drift)


@app.command()
@_handle_errors
def ensemble(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    n: Optional[int] = N_OPTION,
    n_env: Optional[int] = N_ENV_OPTION,
    dt: Optional[float] = DT_OPTION,
    t_final: Optional[float] = T_FINAL_OPTION,
    convention: Optional[str] = CONVENTION_OPTION,
    out: Optional[Path] = OUT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """realization 평균 <Z(t)>_n 을 ensemble.csv, 요약을 ensemble_summary.json 으로 저장."""
    cfg = _resolve(
        config,
        _common_overrides(seed=seed, n=n, n_env=n_env, dt=dt, t_final=t_final, convention=convention, out=out, workers=workers),
    )
    result = run_ensemble(cfg.ensemble_config(), workers=cfg.workers)
    metadata = _metadata(cfg, "ensemble")

    csv_path = write_csv(cfg.out_dir / "ensemble.csv", _ensemble_frame(result), metadata)
    json_path = write_json(cfg.out_dir / "ensemble_summary.json", {**metadata, **result.summary()})
    outputs = [csv_path, json_path]
    if cfg.get("output.plot_script"):
        outputs.append(
            render_template(
                PLOT_TEMPLATE,
                cfg.out_dir / "plot_mean_z.py",
                title="ensemble",
                script_name="plot_mean_z.py",
                csv_files='"ensemble.csv"',
                image_name="ensemble_mean_z.png",
            )
        )
    typer.echo(dump_json(result.summary()))
    _record("ensemble", cfg, outputs, time_avg_Z=result.time_avg_Z)


@app.command("reproduce-fig3")
@_handle_errors
def reproduce_fig3(
    config: Optional[Path] = CONFIG_OPTION,
    seed: Optional[int] = SEED_OPTION,
    n: Optional[int] = N_OPTION,
    n_env: Optional[int] = N_ENV_OPTION,
    dt: Optional[float] = DT_OPTION,
    t_final: Optional[float] = T_FINAL_OPTION,
    convention: Optional[str] = CONVENTION_OPTION,
    out: Optional[Path] = OUT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
    sweep: bool = typer.Option(False, "--sweep", help="{Z(0), N, t_final} 격자 스윕 추가"),
):
    """환경 eps_i = 0 / 50 두 앙상블의 <Z>_t 비교 보고서 (fig3_report.json)."""
    cfg = _resolve(
        config,
        _common_overrides(seed=seed, n=n, n_env=n_env, dt=dt, t_final=t_final, convention=convention, out=out, workers=workers),
    )
    default, swept, report = reproduce(cfg.ensemble_config(), workers=cfg.workers, sweep=sweep)
    metadata = _metadata(cfg, "reproduce-fig3")

    outputs = []
    csv_names = []
    for eps, result in default.results.items():
        name = f"fig3_eps_i_{eps:g}.csv"
        csv_names.append(name)
        outputs.append(write_csv(cfg.out_dir / name, _ensemble_frame(result), {**metadata, "env_epsilon": eps}))
    if swept:
        rows = []
        for outcome in swept:
            row = outcome.as_dict()
            cases = row.pop("cases")
            for label, case in cases.items():
                row[f"time_avg_Z[{label}]"] = case["time_avg_Z"]
                row[f"std_error[{label}]"] = case["std_error"]
            rows.append(row)
        outputs.append(write_csv(cfg.out_dir / "fig3_sweep.csv", pd.DataFrame(rows), metadata))
    outputs.append(write_json(cfg.out_dir / "fig3_report.json", {**metadata, **report}))
    if cfg.get("output.plot_script"):
        outputs.append(
            render_template(
                PLOT_TEMPLATE,
                cfg.out_dir / "plot_fig3.py",
                title="chirality transmission",
                script_name="plot_fig3.py",
                csv_files=", ".join(f'"{name}"' for name in csv_names),
                image_name="fig3_mean_z.png",
            )
        )

    typer.echo(dump_json({"default": report["default"], "acceptance": report["acceptance"],
                          "quantitative_targets": report["quantitative_targets"]}))
    _record("reproduce-fig3", cfg, outputs, acceptance=report["acceptance"])
    if not report["acceptance"]["passed"]:
        raise typer.Exit(EXIT_ACCEPTANCE)


@app.command()
@_handle_errors
def convergence(
    config: Optional[Path] = CONFIG_OPTION,
    n_list: str = typer.Option("100,200,400,800,1600", "--n-list", help="쉼표로 구분한 오름차순 n 목록"),
    seed: Optional[int] = SEED_OPTION,
    n_env: Optional[int] = N_ENV_OPTION,
    dt: Optional[float] = DT_OPTION,
    t_final: Optional[float] = T_FINAL_OPTION,
    convention: Optional[str] = CONVENTION_OPTION,
    out: Optional[Path] = OUT_OPTION,
    workers: Optional[int] = WORKERS_OPTION,
):
    """n 별 <Z>_t 와 표준오차를 convergence.csv 로 저장."""
    try:
        ns = [int(x) for x in n_list.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma separated integers, got {n_list!r}", "--n-list") from None
    cfg = _resolve(
        config,
        _common_overrides(seed=seed, n_env=n_env, dt=dt, t_final=t_final, convention=convention, out=out, workers=workers),
    )
    rows = convergence_study(cfg.ensemble_config(), ns, workers=cfg.workers)
    frame = pd.DataFrame([{"n": r.n, "time_avg_Z": r.time_avg_Z, "std_error": r.std_error} for r in rows])
    path = write_csv(cfg.out_dir / "convergence.csv", frame, _metadata(cfg, "convergence", n_list=ns))
    typer.echo(frame.to_string(index=False))
    _record("convergence", cfg, [path])


# -------------------------------------------------------------
# 스펙트럼 / 포텐셜 / 분류
# -------------------------------------------------------------
@app.command()
@_handle_errors
def spectrum(
    eps: float = typer.Option(..., "--eps", help="중심 분자 epsilon (모델 단위)"),
    delta: float = typer.Option(..., "--delta", help="중심 분자 delta (모델 단위)"),
    lam: float = typer.Option(0.0, "--lambda", help="결합 세기 Lambda"),
    env_z: Optional[List[float]] = typer.Option(None, "--env-z", help="환경 분자 z_i (반복 지정)"),
    system_z: Optional[float] = typer.Option(None, "--system-z", help="지정 시 환경 분자 분리도 계산"),
    eps_i: float = typer.Option(0.0, "--eps-i", help="환경 분자 epsilon_i"),
    delta_i: float = typer.Option(1.0, "--delta-i", help="환경 분자 delta_i"),
    out: Optional[Path] = OUT_OPTION,
):
    """에너지 분리 [모델 에너지 단위] JSON 출력."""
    payload: Dict[str, Any] = {
        "units": "model energy units (hbar = 1)",
        "system": system_split(TwoLevelParams(delta, eps), lam, env_z or []).as_dict(),
    }
    if system_z is not None:
        payload["environment"] = environment_split(TwoLevelParams(delta_i, eps_i), lam, system_z).as_dict()
    typer.echo(dump_json(payload))
    outputs = [write_json(out / "spectrum.json", {"version": __version__, **payload})] if out else []
    _record("spectrum", None, outputs, eps=eps, delta=delta, lam=lam)


def _radial_table(cfg: RunConfig, r: Optional[float]) -> np.ndarray:
    if r is not None:
        return np.array([r])
    pot = cfg.values["potential"]
    return np.geomspace(pot["r_min"], pot["r_max"], pot["r_points"])


def _emit_radial(cfg: RunConfig, command: str, name: str, frame: pd.DataFrame, out: Optional[Path]) -> None:
    if len(frame) == 1 and out is None:
        typer.echo(dump_json({k: float(v) for k, v in frame.iloc[0].items()}))
        _record(command, cfg, [])
        return
    path = write_csv(cfg.out_dir / name, frame, _metadata(cfg, command, potential=cfg.potential_params().as_dict()))
    typer.echo(f"{len(frame)} rows -> {path}")
    _record(command, cfg, [path])


@potential_app.command("i-integral")
@_handle_errors
def potential_i_integral(
    r: Optional[float] = typer.Option(None, "--r", help="거리 [1/m_e], 생략 시 설정의 로그 격자"),
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
):
    """I(r) = int_1^inf e^{-2 x m_e r} sqrt(x^2-1)(1+1/(2x^2)) dx."""
    cfg = _resolve(config, {"output.dir": str(out) if out else None})
    rows = [i_integral_with_error(float(x)) for x in _radial_table(cfg, r)]
    frame = pd.DataFrame({
        "r [1/m_e]": _radial_table(cfg, r),
        "I(r) [dimensionless]": [v for v, _ in rows],
        "error_estimate [dimensionless]": [e for _, e in rows],
    })
    _emit_radial(cfg, "potential i-integral", "i_integral.csv", frame, out)


@potential_app.command("vacpol")
@_handle_errors
def potential_vacpol(
    r: Optional[float] = typer.Option(None, "--r", help="거리 [1/m_e]"),
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
):
    """Z0-광자 진공편극 장거리 항 [MeV] 과 접촉항 계수 [MeV^-2]."""
    cfg = _resolve(config, {"output.dir": str(out) if out else None})
    params = cfg.potential_params()
    grid = _radial_table(cfg, r)
    frame = pd.DataFrame({
        "r [1/m_e]": grid,
        "W_longrange [MeV]": [vacpol_longrange(float(x), params) for x in grid],
        "contact_weight [MeV^-2]": vacpol_contact_weight(params),
    })
    _emit_radial(cfg, "potential vacpol", "vacpol.csv", frame, out)


@potential_app.command("axion")
@_handle_errors
def potential_axion(
    r: Optional[float] = typer.Option(None, "--r", help="거리 [1/m_e]"),
    m_phi: Optional[float] = typer.Option(None, "--m-phi", help="액시온 질량 [MeV]"),
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
):
    """액시온 교환 포텐셜의 sigma_e . r_hat 계수 [MeV]."""
    cfg = _resolve(config, {"output.dir": str(out) if out else None, "potential.m_phi": m_phi})
    params = cfg.potential_params()
    grid = _radial_table(cfg, r)
    frame = pd.DataFrame({
        "r [1/m_e]": grid,
        "V_axion [MeV]": [axion_potential(float(x), params) for x in grid],
    })
    _emit_radial(cfg, "potential axion", "axion.csv", frame, out)


@potential_app.command("weak-charge")
@_handle_errors
def potential_weak_charge(
    z: Optional[int] = typer.Option(None, "--z", help="양성자 수"),
    n: Optional[int] = typer.Option(None, "--n", help="중성자 수"),
    sin2: Optional[float] = typer.Option(None, "--sin2", help="sin^2 theta_W"),
    config: Optional[Path] = CONFIG_OPTION,
):
    """Q_W = (1 - 4 sin^2 theta_W) Z - N 과 약한 중성류 접촉항 계수."""
    cfg = _resolve(config, {"potential.Z_protons": z, "potential.N_neutrons": n, "potential.sin2_theta_W": sin2})
    params = cfg.potential_params()
    payload = {
        "Q_W [dimensionless]": weak_charge(params.Z_protons, params.N_neutrons, params.sin2_theta_W),
        "nc_contact_weight [MeV^-2]": nc_contact_weight(params),
        "Z_protons": params.Z_protons,
        "N_neutrons": params.N_neutrons,
        "sin2_theta_W": params.sin2_theta_W,
    }
    typer.echo(dump_json(payload))
    _record("potential weak-charge", cfg, [])


@app.command()
@_handle_errors
def classify(
    parity: Optional[str] = typer.Option(None, "--parity", help="even | odd"),
    time_reversal: Optional[str] = typer.Option(None, "--time", help="even | odd"),
    interaction: Optional[str] = typer.Option(None, "--interaction", help=" | ".join(INTERACTIONS)),
):
    """P 홀/T 짝 -> truly_chiral, P 홀/T 홀 -> falsely_chiral, P 짝 -> achiral."""
    if interaction is not None:
        if interaction not in INTERACTIONS:
            raise DomainError(f"unknown interaction '{interaction}' (expected one of: {', '.join(INTERACTIONS)})")
        signature = INTERACTIONS[interaction]
    else:
        if parity is None or time_reversal is None:
            raise DomainError("either --interaction or both --parity and --time are required")
        try:
            signature = SymmetrySignature(Parity(parity.lower()), TimeReversal(time_reversal.lower()))
        except ValueError:
            raise DomainError(f"parity/time must be 'even' or 'odd' (got {parity!r}, {time_reversal!r})") from None
    verdict = classify_chirality(signature)
    typer.echo(verdict.value)
    log_info(f"[classify] P={signature.parity.value} T={signature.time_reversal.value} -> {verdict.value}")
    _record("classify", None, [], verdict=verdict.value)


if __name__ == "__main__":
    app()
