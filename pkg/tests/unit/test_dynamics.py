"""
파일명: tests/unit/test_dynamics.py
목적: 해밀턴 방정식/진폭 방정식 우변과 RK4, RK45 적분기 검증
기능:
  - 우변 예제값, 해밀토니안 유한차분 기울기와의 일치 (100개 내부 상태)
  - Rabi 해석해, 진동수, 4차 수렴, 에너지/노름 보존
  - 결합 0 에서 중심 분자 궤적의 비트 단위 분리, 두 표현 간 Z(t) 일치
  - 특이점/적응 스텝 실패 오류
변경이력:
  - 2026-10-19: 최초 구현
"""

import cmath
import math
from types import SimpleNamespace

import numpy as np
import pytest

from chiralenv import dynamics
from chiralenv.core import (
    AmplitudeState,
    AmplitudeSystemEnvState,
    CouplingConvention,
    MoleculeState,
    SystemEnvState,
    TwoLevelParams,
    amplitude_env_from_classical,
    amplitude_from_classical,
    rabi_z,
    total_h_value,
)
from chiralenv.dynamics import (
    CouplingArrays,
    IntegratorConfig,
    IntegratorMethod,
    Representation,
    Trajectory,
    amplitude_rhs,
    cross_formalism_check,
    energy_batch,
    estimate_angular_frequency,
    hamilton_rhs,
    integrate,
    integrate_batch,
    norms_batch,
    system_z_batch,
)
from chiralenv.errors import DomainError, IntegrationError, SingularityError

CONSISTENT = CouplingConvention.HAMILTONIAN_CONSISTENT
PAPER = CouplingConvention.PAPER_LITERAL


def _isolated_pole(params: TwoLevelParams) -> AmplitudeSystemEnvState:
    """a_L = 1 (Z = -1), 환경 없음"""
    return AmplitudeSystemEnvState(AmplitudeState(1.0, 0.0), params)


def _random_state(rng, n_env: int, z_max: float = 0.9) -> SystemEnvState:
    def molecule():
        return MoleculeState(float(rng.uniform(-z_max, z_max)), float(rng.uniform(0.0, 2 * math.pi)))

    def params():
        return TwoLevelParams(float(rng.uniform(0.2, 2.0)), float(rng.uniform(-2.0, 2.0)))

    return SystemEnvState(
        molecule(),
        params(),
        tuple(molecule() for _ in range(n_env)),
        tuple(params() for _ in range(n_env)),
        tuple(float(x) for x in rng.uniform(0.0, 2.0, n_env)),
    )


def _amplitude_rows(z: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """(B, M) 고전 좌표 -> (B, 4M) 진폭 실수 배치 (정준 위상 규약)"""
    a_l = np.sqrt((1.0 - z) / 2.0) * np.exp(-1j * phi)
    a_r = np.sqrt((1.0 + z) / 2.0) + 0j
    y = np.empty((z.shape[0], 4 * z.shape[1]))
    y[:, 0::4], y[:, 1::4] = a_l.real, a_l.imag
    y[:, 2::4], y[:, 3::4] = a_r.real, a_r.imag
    return y


class TestHamiltonRhs:
    """고전 해밀턴 방정식 우변"""

    def test_zero_phases_freeze_populations(self):
        p = TwoLevelParams(1.0, 0.4)
        s = SystemEnvState(MoleculeState(0.3, 0.0), p, (MoleculeState(-0.6, 0.0), MoleculeState(0.2, 0.0)), (p, p), (1.0, 0.5))
        v = hamilton_rhs(s)
        assert v[0] == 0.0
        assert v[2] == 0.0
        assert v[4] == 0.0

    def test_equator_example(self):
        v = hamilton_rhs(SystemEnvState(MoleculeState(0.0, math.pi / 2), TwoLevelParams(1.0, 0.35)))
        assert v[0] == pytest.approx(-2.0)
        assert v[1] == pytest.approx(0.7)

    def test_env_coupling_conventions(self):
        p = TwoLevelParams(1.0, 0.0)
        env = (MoleculeState(0.1, 0.0), MoleculeState(-0.4, 0.0))
        s = SystemEnvState(MoleculeState(0.5, 0.0), p, env, (p, p), (1.0, 3.0))
        base = SystemEnvState(MoleculeState(0.5, 0.0), p, env, (p, p), (0.0, 0.0))
        consistent = hamilton_rhs(s, CONSISTENT) - hamilton_rhs(base, CONSISTENT)
        literal = hamilton_rhs(s, PAPER) - hamilton_rhs(base, PAPER)
        # 중심 분자 항은 두 규약이 같다
        assert consistent[1] == pytest.approx(1.0 * 0.1 + 3.0 * (-0.4))
        assert literal[1] == pytest.approx(consistent[1])
        assert consistent[3] == pytest.approx(1.0 * 0.5)
        assert consistent[5] == pytest.approx(3.0 * 0.5)
        assert literal[3] == pytest.approx(4.0 * 0.5)
        assert literal[5] == pytest.approx(4.0 * 0.5)

    def test_documented_example_matches_gradient(self):
        s = SystemEnvState(
            MoleculeState(0.3, 1.0), TwoLevelParams(1.0, 0.0),
            (MoleculeState(-0.2, 0.5),), (TwoLevelParams(1.0, 2.0),), (1.0,),
        )
        np.testing.assert_allclose(hamilton_rhs(s), self._fd_velocity(s), atol=1e-6)

    def test_symplectic_gradient_random_states(self):
        """100 개 내부 상태에서 (-dH/dPhi, dH/dZ, -dH/dphi_i, dH/dz_i)"""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            s = _random_state(rng, int(rng.integers(0, 6)))
            np.testing.assert_allclose(hamilton_rhs(s, CONSISTENT), self._fd_velocity(s), atol=1e-6, rtol=0)

    @staticmethod
    def _fd_velocity(s: SystemEnvState, h: float = 1e-6) -> np.ndarray:
        y = s.to_vector()
        grad = np.empty_like(y)
        for k in range(y.size):
            up, down = y.copy(), y.copy()
            up[k] += h
            down[k] -= h
            grad[k] = (total_h_value(s.with_vector(up)) - total_h_value(s.with_vector(down))) / (2 * h)
        velocity = np.empty_like(y)
        velocity[0::2] = -grad[1::2]
        velocity[1::2] = grad[0::2]
        return velocity

    def test_singularity_raises(self):
        s = SystemEnvState(MoleculeState(1.0 - 1e-13, 0.2), TwoLevelParams(1.0, 0.0))
        with pytest.raises(SingularityError) as exc:
            hamilton_rhs(s)
        assert exc.value.molecule == 0

    def test_singularity_names_env_molecule(self):
        p = TwoLevelParams(1.0, 0.0)
        s = SystemEnvState(MoleculeState(0.0, 0.0), p, (MoleculeState(0.1, 0.0), MoleculeState(-1.0, 0.0)), (p, p), (1.0, 1.0))
        with pytest.raises(SingularityError) as exc:
            hamilton_rhs(s)
        assert exc.value.molecule == 2


class TestAmplitudeRhs:
    """진폭형 비선형 슈뢰딩거 우변"""

    def setup_method(self):
        rng = np.random.default_rng(5)
        self.state = _random_state(rng, 3)
        self.amp = amplitude_env_from_classical(self.state, global_phase=0.7)

    def _rhs(self, amp: AmplitudeSystemEnvState, convention=CONSISTENT):
        return amplitude_rhs(amp.system, amp.env, amp.system_params, amp.env_params, amp.lambdas, convention)

    def test_norm_is_stationary(self):
        (da_l, da_r), env = self._rhs(self.amp)
        members = [(self.amp.system, (da_l, da_r))] + list(zip(self.amp.env, env))
        for amp, (d_l, d_r) in members:
            rate = 2.0 * ((amp.a_L.conjugate() * d_l).real + (amp.a_R.conjugate() * d_r).real)
            assert abs(rate) < 1e-10

    def test_population_rates_match_classical(self):
        """dz/dt = 2 Re(conj(a_R) da_R) - 2 Re(conj(a_L) da_L) 가 hamilton_rhs 와 같다"""
        (da_l, da_r), env = self._rhs(self.amp)
        velocity = hamilton_rhs(self.state)
        rates = [(self.amp.system, da_l, da_r)] + [(a, d[0], d[1]) for a, d in zip(self.amp.env, env)]
        for k, (amp, d_l, d_r) in enumerate(rates):
            rate = 2.0 * (amp.a_R.conjugate() * d_r).real - 2.0 * (amp.a_L.conjugate() * d_l).real
            assert rate == pytest.approx(velocity[2 * k], abs=1e-12)

    def test_zero_coupling_is_linear_two_level(self):
        params = TwoLevelParams(0.8, 0.3)
        amp = AmplitudeState(cmath.rect(0.6, 0.4), 0.8)
        (d_l, d_r), env = amplitude_rhs(amp, [], params, [], [])
        assert env == []
        assert d_l == pytest.approx(-1j * (0.3 * amp.a_L + 0.8 * amp.a_R))
        assert d_r == pytest.approx(-1j * (0.8 * amp.a_L - 0.3 * amp.a_R))

    def test_racemic_environment_does_not_shift_system(self):
        p = TwoLevelParams(1.0, 0.2)
        system = amplitude_from_classical(MoleculeState(0.4, 0.3))
        env = [amplitude_from_classical(MoleculeState(0.0, phi)) for phi in (0.1, 1.5, 4.0)]
        coupled, _ = amplitude_rhs(system, env, p, [p] * 3, [1.0, 2.0, 0.5])
        alone, _ = amplitude_rhs(system, [], p, [], [])
        assert coupled[0] == pytest.approx(alone[0], abs=1e-15)
        assert coupled[1] == pytest.approx(alone[1], abs=1e-15)

    def test_paper_literal_scales_env_coupling_by_n(self):
        p = TwoLevelParams(0.0, 0.0)
        system = amplitude_from_classical(MoleculeState(0.6, 0.0))
        env = [amplitude_from_classical(MoleculeState(0.0, 0.0)) for _ in range(3)]
        _, consistent = amplitude_rhs(system, env, p, [p] * 3, [1.0] * 3, CONSISTENT)
        _, literal = amplitude_rhs(system, env, p, [p] * 3, [1.0] * 3, PAPER)
        for (c_l, _), (l_l, _), b in zip(consistent, literal, env):
            assert c_l == pytest.approx(-1j * 0.5 * 0.6 * b.a_L)
            assert l_l == pytest.approx(3 * c_l)


class TestIntegratorConfig:
    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(DomainError):
            IntegratorConfig(abs_tol=-1.0)

    def test_rejects_non_multiple_grid(self):
        with pytest.raises(DomainError):
            IntegratorConfig(dt=0.3, t_final=1.0)

    def test_rejects_bad_stride(self):
        with pytest.raises(DomainError):
            IntegratorConfig(record_stride=0)

    def test_sample_grid_keeps_last_step(self):
        cfg = IntegratorConfig(dt=0.1, t_final=1.0, record_stride=3)
        assert cfg.n_steps == 10
        assert cfg.sample_steps().tolist() == [0, 3, 6, 9, 10]
        np.testing.assert_allclose(cfg.sample_times(), [0.0, 0.3, 0.6, 0.9, 1.0])

    def test_method_from_string(self):
        assert IntegratorConfig(method="rk45_adaptive").method is IntegratorMethod.RK45_ADAPTIVE


class TestIntegrate:
    """단일 궤적 적분"""

    def test_rabi_oracle(self):
        traj = integrate(_isolated_pole(TwoLevelParams(1.0, 0.0)), IntegratorConfig(dt=1e-3, t_final=10.0))
        assert traj.representation is Representation.AMPLITUDE
        assert np.max(np.abs(traj.Z - (-np.cos(2 * traj.times)))) < 1e-6
        assert traj.norm_drift < 1e-9

    def test_rabi_with_pved(self):
        params = TwoLevelParams(0.7, 0.4)
        traj = integrate(_isolated_pole(params), IntegratorConfig(dt=1e-3, t_final=10.0, record_stride=10))
        assert np.max(np.abs(traj.Z - rabi_z(traj.times, params, -1.0))) < 1e-6

    def test_rk45_matches_rabi(self):
        params = TwoLevelParams(1.0, 0.3)
        cfg = IntegratorConfig(dt=1e-2, t_final=10.0, method=IntegratorMethod.RK45_ADAPTIVE)
        traj = integrate(_isolated_pole(params), cfg)
        np.testing.assert_allclose(traj.times, cfg.sample_times())
        assert np.max(np.abs(traj.Z - rabi_z(traj.times, params, -1.0))) < 1e-6

    def test_fourth_order_convergence(self):
        params = TwoLevelParams(1.0, 0.3)
        errors = []
        for dt in (0.05, 0.025):
            traj = integrate(_isolated_pole(params), IntegratorConfig(dt=dt, t_final=10.0))
            errors.append(np.max(np.abs(traj.Z - rabi_z(traj.times, params, -1.0))))
        assert 12.0 < errors[0] / errors[1] < 20.0

    def test_angular_frequency_random_pairs(self):
        """20 개 (eps, delta) 쌍을 한 배치로 적분, 각주파수 2 sqrt(eps^2 + delta^2)"""
        rng = np.random.default_rng(17)
        deltas = rng.uniform(0.5, 2.0, 20)
        epsilons = rng.uniform(-1.0, 1.0, 20)
        p = CouplingArrays(deltas[:, None], epsilons[:, None], np.zeros((20, 0)), CONSISTENT)
        y0 = np.tile([1.0, 0.0, 0.0, 0.0], (20, 1))
        times, z = integrate_batch(
            y0, p, IntegratorConfig(dt=0.01, t_final=40.0), Representation.AMPLITUDE,
            observe=lambda y: system_z_batch(y, Representation.AMPLITUDE),
        )
        for k in range(20):
            expected = 2.0 * math.hypot(epsilons[k], deltas[k])
            assert estimate_angular_frequency(times, z[:, k]) == pytest.approx(expected, rel=1e-4)

    def test_classical_energy_drift(self):
        rng = np.random.default_rng(8)
        p = TwoLevelParams(2.0, 0.05)
        env = tuple(MoleculeState(float(z), float(f)) for z, f in zip(rng.uniform(-0.3, 0.3, 2), rng.uniform(-0.2, 0.2, 2)))
        s = SystemEnvState(MoleculeState(0.2, 0.1), p, env, (p, p), (2.0, 1.5))
        traj = integrate(s, IntegratorConfig(dt=1e-3, t_final=50.0, record_stride=50))
        assert traj.representation is Representation.CLASSICAL
        assert traj.conserved_energy_drift < 1e-6
        assert traj.energies[0] == pytest.approx(total_h_value(s))

    def test_singular_start_reports_time(self):
        s = SystemEnvState(MoleculeState(1.0, 0.0), TwoLevelParams(1.0, 0.0))
        with pytest.raises(SingularityError) as exc:
            integrate(s, IntegratorConfig(dt=0.1, t_final=1.0))
        assert exc.value.time == 0.0
        assert exc.value.molecule == 0

    def test_adaptive_failure_reports_time(self, monkeypatch):
        def failing_solver(fun, t_span, y0, **kwargs):
            return SimpleNamespace(
                status=-1,
                message="Required step size is less than spacing between numbers.",
                t=np.array([0.0, 1.5]),
                y=np.tile(y0[:, None], (1, 2)),
            )

        monkeypatch.setattr(dynamics, "solve_ivp", failing_solver)
        cfg = IntegratorConfig(dt=0.1, t_final=2.0, method=IntegratorMethod.RK45_ADAPTIVE)
        with pytest.raises(IntegrationError) as exc:
            integrate(_isolated_pole(TwoLevelParams(1.0, 0.0)), cfg)
        assert exc.value.time == 1.5

    def test_state_at_returns_domain_type(self):
        traj = integrate(_isolated_pole(TwoLevelParams(1.0, 0.0)), IntegratorConfig(dt=0.01, t_final=1.0, record_stride=10))
        assert len(traj.times) == 11
        state = traj.state_at(5)
        assert isinstance(state, AmplitudeSystemEnvState)
        assert abs(state.system.norm() - 1.0) < 1e-12

    def test_trajectory_requires_increasing_times(self):
        with pytest.raises(DomainError):
            Trajectory(
                times=np.array([0.0, 0.0]),
                states=np.zeros((2, 2)),
                representation=Representation.CLASSICAL,
                initial=SystemEnvState(MoleculeState(0.0, 0.0), TwoLevelParams(1.0, 0.0)),
                convention=CONSISTENT,
                energies=np.zeros(2),
                conserved_energy_drift=0.0,
            )


class TestConservation:
    """배치 적분 보존량 (t = 50)"""

    CFG = IntegratorConfig(dt=1e-3, t_final=50.0, record_stride=100)

    @staticmethod
    def _relative_drift(energies: np.ndarray) -> np.ndarray:
        return np.max(np.abs(energies - energies[0]), axis=0) / np.maximum(1.0, np.abs(energies[0]))

    def test_classical_many_weak_partners(self):
        rng = np.random.default_rng(31)
        rows, n_env = 10, 10
        y0 = np.empty((rows, 2 + 2 * n_env))
        y0[:, 0::2] = rng.uniform(-0.5, 0.5, (rows, n_env + 1))
        y0[:, 1::2] = rng.uniform(-0.3, 0.3, (rows, n_env + 1))
        p = CouplingArrays(
            rng.uniform(1.5, 2.0, (rows, n_env + 1)),
            rng.uniform(-0.1, 0.1, (rows, n_env + 1)),
            rng.uniform(0.0, 0.1, (rows, n_env)),
            CONSISTENT,
        )
        _, energies = integrate_batch(
            y0, p, self.CFG, Representation.CLASSICAL,
            observe=lambda y: energy_batch(y, p, Representation.CLASSICAL),
        )
        assert np.all(self._relative_drift(energies) < 1e-6)

    def test_amplitude_strong_coupling(self):
        """N = 10, Lambda <= 2 전 범위. 결합 평균장이 커서 dt 를 절반으로"""
        cfg = IntegratorConfig(dt=5e-4, t_final=50.0, record_stride=200)
        rng = np.random.default_rng(32)
        rows, n_env = 10, 10
        y0 = _amplitude_rows(rng.uniform(-1.0, 1.0, (rows, n_env + 1)), rng.uniform(0.0, 2 * math.pi, (rows, n_env + 1)))
        p = CouplingArrays(
            rng.uniform(0.5, 1.5, (rows, n_env + 1)),
            rng.uniform(-0.5, 0.5, (rows, n_env + 1)),
            rng.uniform(0.0, 2.0, (rows, n_env)),
            CONSISTENT,
        )

        def observe(y):
            return np.concatenate([energy_batch(y, p, Representation.AMPLITUDE)[:, None], norms_batch(y)], axis=1)

        _, samples = integrate_batch(y0, p, cfg, Representation.AMPLITUDE, observe=observe)
        assert np.all(self._relative_drift(samples[:, :, 0]) < 1e-6)
        assert np.max(np.abs(samples[:, :, 1:] - 1.0)) < 1e-9


class TestDecoupling:
    """Lambda_i = 0 이면 중심 분자 궤적이 N = 0 실행과 비트 단위로 같다"""

    CFG = IntegratorConfig(dt=1e-3, t_final=5.0, record_stride=25)

    def test_amplitude_bit_identical(self):
        params = TwoLevelParams(1.0, 0.2)
        env_p = TwoLevelParams(0.5, 3.0)
        system = amplitude_from_classical(MoleculeState(-0.4, 1.2))
        env = tuple(amplitude_from_classical(MoleculeState(z, 0.3)) for z in (0.9, -0.2, 0.5))
        alone = integrate(AmplitudeSystemEnvState(system, params), self.CFG)
        coupled = integrate(AmplitudeSystemEnvState(system, params, env, (env_p,) * 3, (0.0,) * 3), self.CFG)
        assert np.array_equal(alone.states[:, :4], coupled.states[:, :4])

    def test_classical_bit_identical(self):
        params = TwoLevelParams(1.0, 0.2)
        env_p = TwoLevelParams(0.5, 0.1)
        system = MoleculeState(-0.4, 0.2)
        env = (MoleculeState(0.3, 0.1), MoleculeState(-0.2, 0.0))
        alone = integrate(SystemEnvState(system, params), self.CFG)
        coupled = integrate(SystemEnvState(system, params, env, (env_p, env_p), (0.0, 0.0)), self.CFG)
        assert np.array_equal(alone.states[:, :2], coupled.states[:, :2])


class TestCrossFormalism:
    """고전/진폭 두 표현의 Z(t) 일치"""

    CFG = IntegratorConfig(dt=1e-3, t_final=20.0, record_stride=20)

    def test_isolated_molecule(self):
        s = SystemEnvState(MoleculeState(0.3, 0.4), TwoLevelParams(1.0, 0.25))
        assert cross_formalism_check(s, self.CFG) < 1e-6

    def test_one_partner_consistent_coupling(self):
        s = SystemEnvState(
            MoleculeState(0.2, 0.1), TwoLevelParams(1.0, 0.1),
            (MoleculeState(-0.1, 0.2),), (TwoLevelParams(1.0, 0.2),), (1.0,),
        )
        assert cross_formalism_check(s, self.CFG, CONSISTENT) < 1e-5

    def test_phase_orientation_agrees(self):
        s = SystemEnvState(
            MoleculeState(0.2, 0.1), TwoLevelParams(1.0, 0.1),
            (MoleculeState(-0.1, 0.2),), (TwoLevelParams(1.0, 0.2),), (1.0,),
        )
        cfg = IntegratorConfig(dt=1e-3, t_final=5.0, record_stride=50)
        classical = integrate(s, cfg)
        amplitude = integrate(amplitude_env_from_classical(s, global_phase=2.0), cfg)
        z_c, phi_c, env_z_c, env_phi_c = classical.classical_columns()
        z_a, phi_a, env_z_a, env_phi_a = amplitude.classical_columns()
        np.testing.assert_allclose(z_a, z_c, atol=1e-6)
        np.testing.assert_allclose(env_z_a, env_z_c, atol=1e-6)
        assert np.max(np.abs(np.angle(np.exp(1j * (phi_a - phi_c))))) < 1e-6
        assert np.max(np.abs(np.angle(np.exp(1j * (env_phi_a - env_phi_c))))) < 1e-6

    def test_paper_literal_reported(self):
        s = SystemEnvState(
            MoleculeState(0.2, 0.1), TwoLevelParams(1.0, 0.1),
            (MoleculeState(-0.1, 0.2), MoleculeState(0.1, 0.3), MoleculeState(0.0, 0.1)),
            (TwoLevelParams(1.0, 0.2),) * 3, (1.0, 0.5, 0.2),
        )
        cfg = IntegratorConfig(dt=1e-3, t_final=5.0, record_stride=20)
        deviation = cross_formalism_check(s, cfg, PAPER)
        assert math.isfinite(deviation)


class TestFrequencyEstimator:
    def test_offset_cosine(self):
        t = np.linspace(0.0, 30.0, 3001)
        assert estimate_angular_frequency(t, 0.4 + 0.6 * np.cos(1.7 * t + 0.2)) == pytest.approx(1.7, rel=1e-5)

    def test_too_few_crossings(self):
        t = np.linspace(0.0, 1.0, 101)
        with pytest.raises(DomainError):
            estimate_angular_frequency(t, np.cos(t))
