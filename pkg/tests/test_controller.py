import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import slungload as sl
from slungload.controller import (
    AgentCommands,
    ControllerGains,
    ControllerState,
    FixedShareAllocation,
    MinNormAllocation,
    ReferenceSample,
    UniformAllocation,
    allocate_tensions,
    attitude_control,
    attitude_extraction,
    controller_step,
    desired_rate,
    desired_vehicle_position,
    load_control,
    reference_fixed_share,
    vehicle_position_control,
)
from slungload.dynamics import PlantInputs, rk4_step, system_derivative
from slungload.errors import ConfigError, ThrustSingularityError
from slungload.quat import basic_rotation, quat_mul, quat_to_rot

G = 9.81
E3 = np.array([0.0, 0, 1])
M_LOAD = 0.225


def table_gains():
    """The printed gain values used directly as force-unit gains (for the
    single-operation examples, which quote them verbatim)."""
    return ControllerGains(
        kp_load=[9.0, 9, 9], kd_load=[3.5, 3.5, 3.5], ki_load=[0.2, 0.2, 0.2],
        kp_veh=[40.0, 40, 60], kd_veh=[10.0, 10, 12], ki_veh=[2.0, 2, 4],
        rho=62.5, kd_att=16.0, beta=0.0, gamma=1.0,
    )


def hover_ref():
    return ReferenceSample(np.zeros(3), np.zeros(3), np.zeros(3))


class TestGainsValidation:
    def test_rejects_nonpositive_diagonal(self):
        with pytest.raises(ConfigError):
            ControllerGains(
                kp_load=[0.0, 1, 1], kd_load=1, ki_load=1, kp_veh=1, kd_veh=1,
                ki_veh=1, rho=1, kd_att=1.0, beta=0.0, gamma=1.0,
            )

    def test_beta_may_be_zero(self):
        table_gains()

    def test_rejects_indefinite_attitude_gain(self):
        with pytest.raises(ConfigError):
            ControllerGains(
                kp_load=1, kd_load=1, ki_load=1, kp_veh=1, kd_veh=1, ki_veh=1,
                rho=1, kd_att=np.diag([1.0, -1.0, 1.0]), beta=0.0, gamma=1.0,
            )


class TestLoadControl:
    def test_hover_equals_weight(self):
        u = load_control(np.zeros(3), np.zeros(3), np.zeros(3), hover_ref(), table_gains(), M_LOAD)
        assert np.allclose(u, [0, 0, -M_LOAD * G], atol=1e-12)
        assert np.isclose(u[2], -2.2073, atol=5e-4)

    def test_reference_acceleration_feedforward(self):
        ref = ReferenceSample(np.zeros(3), np.zeros(3), np.array([0, 0, 1.0]))
        u = load_control(np.zeros(3), np.zeros(3), np.zeros(3), ref, table_gains(), M_LOAD)
        assert np.allclose(u, [0, 0, -M_LOAD * (G + 1.0)], atol=1e-12)

    def test_position_error_feedback(self):
        u = load_control(np.array([1.0, 0, 0]), np.zeros(3), np.zeros(3), hover_ref(), table_gains(), M_LOAD)
        assert np.allclose(u, [9.0, 0, -M_LOAD * G], atol=1e-12)


class TestAllocation:
    def test_reference_shares_at_hover(self):
        alloc = reference_fixed_share(M_LOAD, G, 3)
        u_load = np.array([0, 0, -M_LOAD * G])
        tv = allocate_tensions(u_load, alloc)
        expected_1 = -(M_LOAD / 3) * basic_rotation("z", -np.pi / 4) @ basic_rotation("y", -np.pi / 6) @ (G * E3)
        assert np.allclose(tv[0], expected_1, atol=1e-12)
        assert np.isclose(tv[0][2], -0.075 * G * np.cos(np.pi / 6), atol=1e-12)
        # residual magnitude of the third share at hover, hand value
        assert np.isclose(np.linalg.norm(tv[2]), 1.0681547333476906, atol=1e-9)

    def test_uniform_split(self):
        tv = allocate_tensions(np.array([0, 0, -M_LOAD * G]), UniformAllocation(3))
        assert np.allclose(tv, np.tile([0, 0, -0.73575], (3, 1)), atol=1e-12)

    def test_reference_share_requires_three(self):
        with pytest.raises(ConfigError):
            reference_fixed_share(M_LOAD, G, 2)

    def test_fixed_share_shape_check(self):
        with pytest.raises(ConfigError):
            FixedShareAllocation(np.zeros((3, 3)), 3)

    @given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=3, max_size=3),
           st.sampled_from(["reference", "uniform", "min-norm", "fixed"]))
    @settings(max_examples=120, deadline=None)
    def test_allocations_sum_exactly(self, u, kind):
        u_load = np.asarray(u)
        alloc = {
            "reference": reference_fixed_share(M_LOAD, G, 3),
            "uniform": UniformAllocation(3),
            "min-norm": MinNormAllocation(3),
            "fixed": FixedShareAllocation(np.array([[1.0, 2, 3], [-1.0, 0, 2]]), 3),
        }[kind]
        tv = allocate_tensions(u_load, alloc)
        assert np.max(np.abs(tv.sum(axis=0) - u_load)) < 1e-12

    def test_min_norm_matches_uniform(self):
        u_load = np.array([0.7, -1.3, 2.9])
        assert np.allclose(
            allocate_tensions(u_load, MinNormAllocation(4)),
            allocate_tensions(u_load, UniformAllocation(4)), atol=1e-12,
        )


class TestDesiredVehiclePosition:
    def test_straight_above(self):
        x_d, alpha_d, t_d = desired_vehicle_position(hover_ref(), np.array([0, 0, -1.0]), 1.0)
        assert np.allclose(alpha_d, [0, 0, -1], atol=1e-12)
        assert np.allclose(x_d, [0, 0, 1], atol=1e-12)
        assert np.isclose(t_d, 1.0)

    def test_tilted(self):
        ref = ReferenceSample(np.array([1.0, 1, 1]), np.zeros(3), np.zeros(3))
        tv = np.array([0, -1.0, -1.0]) / np.sqrt(2)
        x_d, alpha_d, t_d = desired_vehicle_position(ref, tv, 1.0)
        assert np.allclose(x_d, [1.0, 1 + np.sqrt(2) / 2, 1 + np.sqrt(2) / 2], atol=1e-12)

    def test_hover_uniform_tension_magnitude(self):
        _, _, t_d = desired_vehicle_position(hover_ref(), np.array([0, 0, -0.73575]), 1.0)
        assert np.isclose(t_d, 0.73575, atol=1e-12)

    def test_near_zero_tension_holds_previous_direction(self):
        prev = np.array([0, 0, -1.0])
        _, alpha_d, _ = desired_vehicle_position(hover_ref(), np.zeros(3), 1.0, prev_dir=prev)
        assert np.allclose(alpha_d, prev)
        with pytest.raises(ConfigError):
            desired_vehicle_position(hover_ref(), np.zeros(3), 1.0)


class TestVehiclePositionControl:
    def test_hover_uniform(self):
        tv = np.array([0, 0, -0.73575])
        x = np.array([0, 0, 1.0])
        u = vehicle_position_control(
            x, np.zeros(3), np.zeros(3), hover_ref(), np.array([0, 0, -1.0]),
            np.zeros(3), tv, table_gains(), 0.5, 1.0,
        )
        assert np.allclose(u, [0, 0, 0.5 * G + 0.73575], atol=1e-12)
        assert np.isclose(np.linalg.norm(u), 5.64075, atol=1e-5)

    def test_position_error_gain(self):
        tv = np.array([0, 0, -0.73575])
        base = vehicle_position_control(
            np.array([0, 0, 1.0]), np.zeros(3), np.zeros(3), hover_ref(),
            np.array([0, 0, -1.0]), np.zeros(3), tv, table_gains(), 0.5, 1.0,
        )
        shifted = vehicle_position_control(
            np.array([0.1, 0, 1.0]), np.zeros(3), np.zeros(3), hover_ref(),
            np.array([0, 0, -1.0]), np.zeros(3), tv, table_gains(), 0.5, 1.0,
        )
        assert np.allclose(shifted - base, [-4.0, 0, 0], atol=1e-12)


class TestAttitudeExtraction:
    def test_vertical(self):
        f, q = attitude_extraction(np.array([0, 0, 5.0]))
        assert np.isclose(f, 5.0)
        assert np.allclose(q, [1, 0, 0, 0], atol=1e-12)

    def test_pitch_45(self):
        f, q = attitude_extraction(np.array([np.sqrt(2) / 2, 0, np.sqrt(2) / 2]))
        assert np.allclose(q, [0.92387953, 0, 0.38268343, 0], atol=1e-8)
        assert np.allclose(quat_to_rot(q) @ E3, [np.sqrt(2) / 2, 0, np.sqrt(2) / 2], atol=1e-12)

    def test_roll_45(self):
        _, q = attitude_extraction(np.array([0, np.sqrt(2) / 2, np.sqrt(2) / 2]))
        assert np.allclose(q, [0.92387953, -0.38268343, 0, 0], atol=1e-8)

    def test_singularities(self):
        with pytest.raises(ThrustSingularityError):
            attitude_extraction(np.array([0, 0, -1.0]))
        with pytest.raises(ThrustSingularityError):
            attitude_extraction(np.zeros(3))

    def test_consistency_on_random_directions(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        count = 0
        while count < 1000:
            u = rng.normal(size=3) * rng.uniform(0.5, 20)
            if np.linalg.norm(u) < 1e-3 or u[2] / np.linalg.norm(u) < -0.999:
                continue
            count += 1
            f, q = attitude_extraction(u)
            assert q[3] == 0.0
            u_hat = u / np.linalg.norm(u)
            worst = max(worst, np.linalg.norm(quat_to_rot(q) @ E3 - u_hat))
        assert worst < 1e-9


class TestDesiredRate:
    def test_zero_rate_for_constant_direction(self):
        assert np.allclose(desired_rate(E3.copy(), np.zeros(3)), 0.0)

    def test_vertical_direction_formula(self):
        om = desired_rate(E3.copy(), np.array([0.3, -0.7, 0.0]))
        assert np.allclose(om, [0.7, 0.3, 0.0], atol=1e-12)

    def test_kinematic_consistency(self):
        # slowly rotating thrust direction: the quaternion from the extraction
        # must satisfy q_dot = 1/2 q ⊗ [0, omega_d] to finite-difference accuracy
        dt = 1e-3

        def u_hat(t):
            v = np.array([0.3 * np.sin(0.8 * t), 0.2 * np.cos(0.5 * t), 1.0])
            return v / np.linalg.norm(v)

        worst = 0.0
        for t in np.linspace(0.1, 5.0, 40):
            uh = u_hat(t)
            uh_dot = (u_hat(t + dt) - u_hat(t - dt)) / (2 * dt)
            om = desired_rate(uh, uh_dot)
            _, q = attitude_extraction(u_hat(t))
            _, q_next = attitude_extraction(u_hat(t + dt))
            _, q_prev = attitude_extraction(u_hat(t - dt))
            q_dot_num = (q_next - q_prev) / (2 * dt)
            q0, qv = q[0], q[1:]
            q_dot_kin = 0.5 * np.concatenate([[-qv @ om], q0 * om + np.cross(qv, om)])
            worst = max(worst, np.max(np.abs(q_dot_num - q_dot_kin)))
        assert worst < 1e-3


class TestAttitudeControl:
    def test_zero_error_zero_torque(self):
        tau = attitude_control(np.array([1.0, 0, 0, 0]), np.zeros(3), table_gains())
        assert np.allclose(tau, 0.0)

    def test_rate_error_gain(self):
        tau = attitude_control(np.array([1.0, 0, 0, 0]), np.array([0.1, 0, 0]), table_gains())
        assert np.allclose(tau, [-1.6, 0, 0], atol=1e-12)

    def test_manifold_gain(self):
        q_err = np.array([np.sqrt(1 - 0.01**2), 0.01, 0, 0])
        tau = attitude_control(q_err, np.zeros(3), table_gains())
        assert np.allclose(tau, [-10.0, 0, 0], atol=1e-12)

    def test_saturation_term(self):
        g = table_gains()
        g.beta = np.array([2.0, 2.0, 2.0])
        g.gamma = np.array([10.0, 10.0, 10.0])
        # large manifold value: sat clamps at 1, adds -beta
        tau_big = attitude_control(np.array([1.0, 0, 0, 0]), np.array([5.0, 0, 0]), g)
        assert np.isclose(tau_big[0], -16 * 5.0 - 2.0, atol=1e-12)
        # small manifold value: sat is linear
        tau_small = attitude_control(np.array([1.0, 0, 0, 0]), np.array([0.001, 0, 0]), g)
        assert np.isclose(tau_small[0], -16 * 0.001 - 2.0 * 10.0 * 0.001, atol=1e-12)


class TestControllerStep:
    def test_hover_equilibrium_reproduces_itself(self, params3, gains):
        state, alloc = sl.hover_equilibrium_conditions(params3)
        ctrl = ControllerState(3)
        inputs, commands = controller_step(state, ctrl, hover_ref(), gains, params3, alloc, 1e-3)
        deriv, info = system_derivative(state, inputs, params3)
        assert np.max(np.abs(deriv.v_load)) < 1e-9
        assert np.max(np.abs(deriv.v)) < 1e-9
        assert np.max(np.abs(inputs.torque)) < 1e-9
        assert np.allclose(info.tensions, 0.8495709211125343, atol=1e-9)

    def test_integrals_stay_zero_on_reference(self, params3, gains):
        state, alloc = sl.hover_equilibrium_conditions(params3)
        ctrl = ControllerState(3)
        for _ in range(50):
            inputs, _ = controller_step(state, ctrl, hover_ref(), gains, params3, alloc, 1e-3)
            state, _ = rk4_step(state, inputs, 1e-3, params3)
        assert np.max(np.abs(ctrl.load_integral)) < 1e-12
        assert np.max(np.abs(ctrl.veh_integral)) < 1e-10

    def test_residual_agent_dominates_initial_effort(self, params3, gains):
        # the third vehicle absorbs the allocation residual and starts with a
        # formation error, so it must command the largest thrust at step 0
        state = sl.reference_initial_conditions(params3)
        alloc = reference_fixed_share(params3.load_mass, G, 3)
        ctrl = ControllerState(3)
        ref = sl.spiral_reference(0.0)
        inputs, _ = controller_step(state, ctrl, ref, gains, params3, alloc, 1e-3)
        assert inputs.thrust[2] > inputs.thrust[0]
        assert inputs.thrust[2] > inputs.thrust[1]

    def test_regulation_from_reference_initial_conditions(self, params3, gains):
        # constant setpoint: the error must fall below 1 cm within 10 s
        state = sl.reference_initial_conditions(params3)
        alloc = reference_fixed_share(params3.load_mass, G, 3)
        ctrl = ControllerState(3)
        ref = ReferenceSample(np.array([0.3, -0.2, 0.5]), np.zeros(3), np.zeros(3))
        below_since = None
        for k in range(10000):
            inputs, _ = controller_step(state, ctrl, ref, gains, params3, alloc, 1e-3)
            state, _ = rk4_step(state, inputs, 1e-3, params3)
            err = np.linalg.norm(state.x_load - ref.position)
            if err < 0.01 and below_since is None:
                below_since = state.t
        assert below_since is not None and below_since < 10.0
        assert np.linalg.norm(state.x_load - ref.position) < 0.01

    def test_attitude_manifold_exponential_envelope(self, params3, gains):
        # torque-only test: translation frozen, attitude starts tilted; the
        # manifold norm must decay inside an exponential envelope
        from slungload.quat import quat_error, quat_normalize, quat_rate_batch

        j = params3.inertias[0]
        j_inv = params3.inertias_inv[0]
        q = quat_normalize(np.array([0.98, 0.15, -0.1, 0.05]))
        om = np.array([0.5, -0.3, 0.2])
        q_d = np.array([1.0, 0, 0, 0])
        dt = 1e-4

        def manifold(q, om):
            q_e = quat_error(q_d, q)
            return om + gains.rho * q_e[1:]

        s0 = np.linalg.norm(manifold(q, om))
        t = 0.0
        for k in range(20000):
            q_e = quat_error(q_d, q)
            tau = attitude_control(q_e, om, gains)
            # rigid-body attitude dynamics only
            for _ in range(1):
                dq = quat_rate_batch(q[None, :], om[None, :])[0]
                dom = j_inv @ (tau - np.cross(om, j @ om))
                q = quat_normalize(q + dt * dq)
                om = om + dt * dom
            t += dt
            s = np.linalg.norm(manifold(q, om))
            assert s <= s0 * np.exp(-20.0 * t) + 1e-9, f"envelope violated at t={t}"
