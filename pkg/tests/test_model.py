"""Grey-box model: parameters, kinematics, mixer, dynamics and integrator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadsid.errors import ConfigError, GimbalLock, InvalidParams, NumericalDivergence
from quadsid.model import (DIVERGENCE_LIMIT, PHI, PSI, R, THETA, VZ, Z, QuadParams, body_rates_from_euler,
                           dynamics_derivatives, euler_rate_map, hover_speeds, hover_state, mix_forward,
                           mix_inverse, momentum_thrust, motor_power, rotation_body_to_global, step_rk4,
                           thrust_coefficient)

# frozen oracles, computed by hand from the formulas
HOVER_SPEED = 640.0026  # sqrt(4.0 * 9.81 / (4 * 2.3950e-05))
MOTOR_POWER_CASE = 18.72  # (0.1 + 0.004) * (0.002 + 0.05 + 0.02) / 0.0004
MOMENTUM_THRUST_CASE = 17.318  # (pi / 2) * 0.09 * 1.225 * 100
U1_AT_2094 = 420.23  # 4 * 2.3950e-05 * 2094.4**2
U4_CASE = 8.827e-03  # 6.8429e-07 * (650**2 - 640**2)


def _rot(axis: int, a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    m = np.eye(3)
    i, j = [(1, 2), (0, 2), (0, 1)][axis]
    m[i, i], m[i, j], m[j, i], m[j, j] = c, -s, s, c
    if axis == 1:  # rotation about y has the opposite off-diagonal signs
        m[i, j], m[j, i] = s, -s
    return m


class TestQuadParams:
    def test_defaults(self, params):
        assert params.K_T == 2.3950e-05
        assert params.b == 6.8429e-07
        assert params.m == 4.0 and params.l == 0.25
        np.testing.assert_allclose(params.hover_speed, HOVER_SPEED, rtol=1e-7)

    @pytest.mark.parametrize("field,value", [("m", 0.0), ("Jx", -1.0), ("K_T", 0.0), ("Kd_z", -0.1),
                                             ("rho", 0.0), ("b", -1e-7), ("Jr", -1e-5)])
    def test_invariants(self, params, field, value):
        with pytest.raises(InvalidParams):
            params.replace(**{field: value})

    def test_zero_yaw_drag_is_allowed(self, params):
        assert params.replace(b=0.0).b == 0.0

    def test_from_file_overrides_and_rejects_unknown(self, tmp_path):
        good = tmp_path / "p.cfg"
        good.write_text("m = 2.0  # lighter frame\nK_T = 1e-5\n")
        p = QuadParams.from_file(good)
        assert p.m == 2.0 and p.K_T == 1e-5 and p.l == 0.25
        bad = tmp_path / "bad.cfg"
        bad.write_text("mass = 2.0\n")
        with pytest.raises(ConfigError, match="mass"):
            QuadParams.from_file(bad)


class TestRotation:
    def test_zero_angles_identity(self):
        np.testing.assert_array_equal(rotation_body_to_global(0.0, 0.0, 0.0), np.eye(3))

    def test_pure_yaw_maps_body_x_to_global_y(self):
        Rm = rotation_body_to_global(0.0, 0.0, math.pi / 2)
        np.testing.assert_allclose(Rm[:, 0], [0.0, 1.0, 0.0], atol=1e-15)

    def test_orthonormal_case(self):
        Rm = rotation_body_to_global(0.1, 0.2, 0.3)
        assert np.max(np.abs(Rm @ Rm.T - np.eye(3))) < 1e-12

    def test_matches_zyx_composition(self):
        phi, theta, psi = 0.3, -0.4, 1.1
        expected = _rot(2, psi) @ _rot(1, theta) @ _rot(0, phi)
        np.testing.assert_allclose(rotation_body_to_global(phi, theta, psi), expected, atol=1e-15)
        assert rotation_body_to_global(0.0, 0.2, 0.0)[2, 0] == pytest.approx(-math.sin(0.2))

    def test_random_orthonormality(self, rng):
        for phi, theta, psi in rng.uniform(-math.pi, math.pi, size=(1000, 3)):
            Rm = rotation_body_to_global(phi, theta, psi)
            assert np.max(np.abs(Rm.T @ Rm - np.eye(3))) < 1e-12
            assert abs(np.linalg.det(Rm) - 1.0) <= 1e-12


class TestEulerRates:
    def test_identity_at_zero(self):
        np.testing.assert_allclose(euler_rate_map(0.0, 0.0, (0.1, -0.2, 0.3)), (0.1, -0.2, 0.3))

    def test_gimbal_lock(self):
        with pytest.raises(GimbalLock):
            euler_rate_map(0.0, math.pi / 2 - 1e-9, (0.0, 0.0, 0.0))

    def test_matches_matrix_product(self):
        phi = theta = math.pi / 6
        sf, cf, tt, ct = 0.5, math.sqrt(3) / 2, 1 / math.sqrt(3), math.sqrt(3) / 2
        W = np.array([[1, sf * tt, cf * tt], [0, cf, -sf], [0, sf / ct, cf / ct]])
        np.testing.assert_allclose(euler_rate_map(phi, theta, (0.1, 0.2, 0.3)), W @ [0.1, 0.2, 0.3],
                                   rtol=1e-14)

    def test_inverse_map(self, rng):
        for phi, theta in rng.uniform(-1.2, 1.2, size=(50, 2)):
            rates = rng.normal(size=3)
            back = body_rates_from_euler(phi, theta, euler_rate_map(phi, theta, rates))
            np.testing.assert_allclose(back, rates, atol=1e-12)


class TestCoefficients:
    def test_motor_power_zero(self, params):
        p = params.replace(I0=0.0)
        assert motor_power(0.0, 123.0, p) == 0.0

    def test_motor_power_hand_value(self, params):
        p = params.replace(I0=0.2, R_m=0.5, K_tau=0.02, K_v=0.01)
        np.testing.assert_allclose(motor_power(0.1, 100.0, p), MOTOR_POWER_CASE, rtol=1e-12)

    def test_motor_power_monotone_in_speed(self, params):
        assert motor_power(0.0, 200.0, params) > motor_power(0.0, 100.0, params)

    def test_motor_power_needs_torque_constant(self, params):
        with pytest.raises(InvalidParams):
            motor_power(0.1, 10.0, params.replace(K_tau=0.0))

    def test_momentum_thrust(self, params):
        p = params.replace(D=0.3, rho=1.225)
        assert momentum_thrust(0.0, p) == 0.0
        np.testing.assert_allclose(momentum_thrust(10.0, p), MOMENTUM_THRUST_CASE, rtol=1e-4)
        np.testing.assert_allclose(momentum_thrust(20.0, p), 4 * momentum_thrust(10.0, p), rtol=1e-15)

    def test_thrust_coefficient_reported_value(self):
        kt = thrust_coefficient(105.0588, 2.0944e03)
        assert f"{kt:.4e}" == "2.3950e-05"

    def test_thrust_coefficient_trivial(self):
        assert thrust_coefficient(0.0, 50.0) == 0.0
        assert thrust_coefficient(4.0, 2.0) == 1.0
        with pytest.raises(InvalidParams):
            thrust_coefficient(1.0, 0.0)


class TestMixer:
    def test_symmetric_hover(self, params):
        u = mix_forward(np.full(4, 500.0), params)
        np.testing.assert_allclose(u[1:], 0.0, atol=1e-15)
        np.testing.assert_allclose(u[0], 4 * params.K_T * 500.0**2, rtol=1e-15)

    def test_total_thrust_at_reported_speed(self, params):
        np.testing.assert_allclose(mix_forward(np.full(4, 2094.4), params)[0], U1_AT_2094, rtol=1e-4)

    def test_yaw_moment(self, params):
        u = mix_forward([640.0, 640.0, 640.0, 650.0], params)
        np.testing.assert_allclose(u[3], U4_CASE, rtol=1e-4)

    def test_inverse_of_symmetric_case(self, params):
        w, saturated = mix_inverse([4 * params.K_T * 600.0**2, 0, 0, 0], params)
        np.testing.assert_allclose(w, 600.0, rtol=1e-14)
        assert not saturated

    def test_round_trip(self, params, rng):
        w = rng.uniform(300.0, 900.0, size=(200, 4))
        back, saturated = mix_inverse(mix_forward(w, params), params)
        assert not saturated
        np.testing.assert_allclose(back, w, rtol=1e-10)

    def test_saturation_flag(self, params):
        w, saturated = mix_inverse([0.0, 5.0, 0.0, 0.0], params)
        assert saturated
        assert np.all(w >= 0)


class TestDynamics:
    def test_hover_fixed_point(self, params):
        d = dynamics_derivatives(hover_state(), hover_speeds(params), params)
        assert np.max(np.abs(d)) < 1e-12

    def test_free_fall(self, params):
        d = dynamics_derivatives(np.zeros(12), np.zeros(4), params)
        expected = np.zeros(12)
        expected[VZ] = params.g
        np.testing.assert_array_equal(d, expected)

    def test_left_motor_rolls_and_yaws(self, params):
        w = hover_speeds(params)
        w[3] += 10.0
        d = dynamics_derivatives(hover_state(), w, params)
        excess = w[3] ** 2 - w[1] ** 2
        np.testing.assert_allclose(d[9], params.l * params.K_T * excess / params.Jx, rtol=1e-12)
        assert d[9] > 0
        np.testing.assert_allclose(d[11], params.b * excess / params.Jz, rtol=1e-12)
        assert d[11] != 0

    def test_front_motor_pitches_up(self, params):
        w = hover_speeds(params)
        w[0] += 10.0
        d = dynamics_derivatives(hover_state(), w, params)
        assert d[10] > 0

    def test_pitch_up_accelerates_backwards(self, params):
        x = hover_state()
        x[THETA] = 0.1
        d = dynamics_derivatives(x, hover_speeds(params), params)
        assert d[3] < 0

    def test_gimbal_lock(self, params):
        x = hover_state()
        x[THETA] = math.pi / 2
        with pytest.raises(GimbalLock):
            dynamics_derivatives(x, hover_speeds(params), params)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.0, 2000.0), min_size=4, max_size=4),
           st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
    def test_no_yaw_moment_without_drag(self, w, phi, theta):
        p = QuadParams.default().replace(b=0.0)
        x = hover_state()
        x[PHI], x[THETA] = phi, theta
        assert dynamics_derivatives(x, w, p)[R] == 0.0


class TestRk4:
    def test_hover_step(self, params):
        x = step_rk4(hover_state(), hover_speeds(params), params, 0.001)
        assert np.max(np.abs(x)) < 1e-12

    def _fall(self, params, dt):
        p = params.replace(Kd_z=0.0)
        x = hover_state()
        for _ in range(round(1.0 / dt)):
            x = step_rk4(x, np.zeros(4), p, dt)
        return x

    def test_free_fall_one_second(self, params):
        x = self._fall(params, 0.001)
        np.testing.assert_allclose(x[Z], params.g / 2, rtol=1e-12)
        np.testing.assert_allclose(x[VZ], params.g, rtol=1e-12)
        assert abs(self._fall(params, 0.0005)[Z] - x[Z]) < 1e-10

    def test_divergence(self, params):
        x = hover_state()
        x[0] = DIVERGENCE_LIMIT
        with pytest.raises(NumericalDivergence):
            step_rk4(x, hover_speeds(params), params, 0.001)

    def test_rejects_nonpositive_step(self, params):
        with pytest.raises(ValueError):
            step_rk4(hover_state(), hover_speeds(params), params, 0.0)

    def test_drag_dissipates_horizontal_energy(self, params):
        x = hover_state()
        x[3], x[4] = 3.0, -2.0
        energy = []
        for _ in range(2000):
            energy.append(x[3] ** 2 + x[4] ** 2)
            x = step_rk4(x, np.zeros(4), params, 0.001)
        assert np.all(np.diff(energy) <= 0)
        assert energy[-1] < energy[0]

    def test_asymmetric_speeds_spin_up_yaw(self, params):
        w = np.array([600.0, 680.0, 600.0, 680.0])
        x = hover_state()
        rates = []
        for _ in range(2000):
            x = step_rk4(x, w, params, 0.001)
            rates.append(abs(x[R]))
        assert np.all(np.diff(rates) > 0)
        assert x[PSI] != 0.0
