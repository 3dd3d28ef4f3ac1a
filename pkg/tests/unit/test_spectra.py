"""
파일명: tests/unit/test_spectra.py
목적: 혼합각, 폐형 고유값, delta_E = 2 eps_eff 항등식 검증
변경이력:
  - 2026-10-19: 최초 구현
"""

import math

import numpy as np
import pytest

from chiralenv.core import MoleculeState, SystemEnvState, TwoLevelParams
from chiralenv.dynamics import IntegratorConfig, integrate
from chiralenv.errors import DegenerateAngleError, DomainError
from chiralenv.spectra import (
    environment_split,
    mixing_angle,
    split_oracle,
    splits_along_trajectory,
    system_split,
)


def _block(delta: float, epsilon_eff: float) -> np.ndarray:
    return np.array([[epsilon_eff, delta], [delta, -epsilon_eff]], dtype=float)


class TestMixingAngle:
    def test_examples(self):
        assert mixing_angle(1.0, 0.0).theta == pytest.approx(math.pi / 4)
        assert mixing_angle(0.0, 1.0).theta == 0.0
        assert mixing_angle(0.0, -1.0).theta == pytest.approx(math.pi / 2)

    def test_range(self):
        rng = np.random.default_rng(0)
        for delta, eps in zip(rng.uniform(0, 3, 200), rng.uniform(-3, 3, 200)):
            assert 0.0 <= mixing_angle(float(delta), float(eps)).theta <= math.pi / 2

    def test_degenerate(self):
        with pytest.raises(DegenerateAngleError):
            mixing_angle(0.0, 0.0)


class TestSplits:
    """평균장 eps_eff 에서의 거울상 에너지"""

    def test_no_environment(self):
        split = system_split(TwoLevelParams(1.0, 1.0), 0.0, [])
        assert split.lambda_plus == pytest.approx(math.sqrt(2.0))
        assert split.lambda_minus == pytest.approx(-math.sqrt(2.0))
        assert split.delta_E == pytest.approx(2.0)

    def test_mean_field_shift(self):
        split = system_split(TwoLevelParams(1.0, 0.0), 2.0, [0.5, 0.5])
        assert split.epsilon_eff == pytest.approx(1.0)
        assert split.delta_E == pytest.approx(2.0)

    def test_environment_side(self):
        split = environment_split(TwoLevelParams(0.5, 50.0), 1.0, -1.0)
        assert split.epsilon_eff == pytest.approx(49.5)
        assert split.E_L == pytest.approx(49.5, rel=1e-12)

    def test_fully_degenerate_is_zero(self):
        split = system_split(TwoLevelParams(0.0, 0.0), 0.0, [])
        assert (split.lambda_plus, split.E_L, split.E_R, split.delta_E, split.theta) == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_out_of_range_population(self):
        with pytest.raises(DomainError):
            system_split(TwoLevelParams(1.0, 0.0), 1.0, [1.5])
        with pytest.raises(DomainError):
            environment_split(TwoLevelParams(1.0, 0.0), 1.0, -1.01)

    def test_against_numerical_diagonalization(self):
        """1000 회 무작위 추출에서 폐형 고유값 = eigh, delta_E = 2 eps_eff"""
        rng = np.random.default_rng(42)
        for _ in range(1000):
            params = TwoLevelParams(float(rng.uniform(0.0, 5.0)), float(rng.uniform(-5.0, 5.0)))
            lam = float(rng.uniform(-3.0, 3.0))
            env_z = rng.uniform(-1.0, 1.0, int(rng.integers(0, 8)))
            split = system_split(params, lam, env_z)
            values, vectors = split_oracle(_block(params.delta, split.epsilon_eff))
            assert split.lambda_plus == pytest.approx(values[0], abs=1e-12 * max(1.0, abs(values[0])))
            assert split.lambda_minus == pytest.approx(values[1], abs=1e-12 * max(1.0, abs(values[1])))
            assert split.delta_E == pytest.approx(2.0 * split.epsilon_eff, abs=1e-12 * max(1.0, abs(split.epsilon_eff)))
            # E_L = <L|H|L> = sum_k lambda_k |<L|k>|^2
            e_l = float(np.sum(values * np.abs(vectors[0, :]) ** 2))
            assert split.E_L == pytest.approx(e_l, abs=1e-12 * max(1.0, abs(values[0])))

    def test_monotone_in_environment_population(self):
        params = TwoLevelParams(1.0, 0.1)
        previous = -math.inf
        for z in np.linspace(-1.0, 1.0, 41):
            delta_e = system_split(params, 1.0, [float(z)] * 3).delta_E
            assert delta_e > previous
            previous = delta_e

    def test_decoupled_limit_recovers_bare_pved(self):
        for delta in (1e-3, 1e-6, 1e-9):
            split = system_split(TwoLevelParams(delta, 0.7), 0.0, [0.4, -0.2])
            assert split.delta_E == pytest.approx(1.4)
            assert split.theta < delta


class TestSplitOracle:
    def test_sorted_descending(self):
        values, _ = split_oracle([[1.0, 2.0], [2.0, -3.0]])
        assert values[0] > values[1]
        assert values[0] + values[1] == pytest.approx(-2.0)

    def test_complex_hermitian(self):
        values, vectors = split_oracle([[0.0, 1j], [-1j, 0.0]])
        np.testing.assert_allclose(values, [1.0, -1.0])
        np.testing.assert_allclose(np.abs(vectors) ** 2, 0.5)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            split_oracle([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_wrong_shape(self):
        with pytest.raises(DomainError):
            split_oracle(np.eye(3))


class TestAlongTrajectory:
    def test_follows_environment_populations(self):
        p = TwoLevelParams(1.0, 0.2)
        s = SystemEnvState(
            MoleculeState(0.1, 0.2), p,
            (MoleculeState(0.3, 0.1), MoleculeState(-0.4, 0.5)), (p, p), (1.0, 0.5),
        )
        traj = integrate(s, IntegratorConfig(dt=1e-2, t_final=1.0, record_stride=10))
        splits = splits_along_trajectory(traj)
        assert len(splits) == len(traj.times)
        for split, state in zip(splits, traj.states):
            expected = 0.2 + 0.5 * (1.0 * state[2] + 0.5 * state[4])
            assert split.epsilon_eff == pytest.approx(expected, abs=1e-14)
            assert split.delta_E == pytest.approx(2.0 * expected)

    def test_uniform_lambda_override(self):
        p = TwoLevelParams(1.0, 0.0)
        s = SystemEnvState(MoleculeState(0.1, 0.2), p, (MoleculeState(0.3, 0.1),), (p,), (1.0,))
        traj = integrate(s, IntegratorConfig(dt=1e-2, t_final=0.1))
        split = splits_along_trajectory(traj, lam=4.0)[0]
        assert split.epsilon_eff == pytest.approx(0.5 * 4.0 * 0.3)
