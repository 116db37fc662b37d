import json

import numpy as np
import pytest

import slungload as sl
from slungload.errors import ConfigError
from slungload.scenario import (
    LineTrajectory,
    SpiralTrajectory,
    explicit_initial_conditions,
    load_config,
)

SQRT3_2 = np.sqrt(3.0) / 2.0


class TestSpiralReference:
    def test_origin_at_start(self):
        s = sl.spiral_reference(0.0)
        assert np.allclose(s.position, [0, 0, 0], atol=1e-12)

    def test_half_period_point(self):
        s = sl.spiral_reference(2.5)
        assert np.allclose(s.position, [2.0, 0.0, 0.25], atol=1e-12)

    def test_horizontal_acceleration_magnitude_constant(self):
        w2 = (2 * np.pi / 5) ** 2
        for t in (0.0, 0.7, 3.3, 12.0):
            s = sl.spiral_reference(t)
            assert np.isclose(np.linalg.norm(s.acceleration[:2]), w2, atol=1e-12)
        assert np.isclose(w2, 1.5791367041742972, atol=1e-12)

    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(3)
        traj = SpiralTrajectory()
        h = 1e-5
        for t in rng.uniform(0, 20, 100):
            s = traj.sample(t)
            vel_fd = (traj.sample(t + h).position - traj.sample(t - h).position) / (2 * h)
            acc_fd = (traj.sample(t + h).velocity - traj.sample(t - h).velocity) / (2 * h)
            assert np.max(np.abs(s.velocity - vel_fd)) < 1e-6
            assert np.max(np.abs(s.acceleration - acc_fd)) < 1e-6


class TestLineTrajectory:
    def test_reaches_endpoint_and_stops(self):
        traj = LineTrajectory([0, 0, 0], [2.0, 0, 0], cruise_speed=0.5, accel=0.5)
        s = traj.sample(100.0)
        assert np.allclose(s.position, [2, 0, 0], atol=1e-12)
        assert np.allclose(s.velocity, 0.0)

    def test_derivatives_consistent(self):
        traj = LineTrajectory([0, 0, 0], [1.0, 1.0, 0.5], cruise_speed=0.4, accel=0.8)
        h = 1e-6
        for t in np.linspace(0.05, 4.0, 37):
            s = traj.sample(t)
            vel_fd = (traj.sample(t + h).position - traj.sample(t - h).position) / (2 * h)
            assert np.max(np.abs(s.velocity - vel_fd)) < 1e-5


class TestReferenceInitialConditions:
    def test_third_vehicle_position(self, params3):
        state = sl.reference_initial_conditions(params3)
        assert np.allclose(state.x[2], [0.5, 0.0, SQRT3_2], atol=1e-12)

    def test_cable_lengths_exact(self, params3):
        state = sl.reference_initial_conditions(params3)
        assert np.allclose(np.linalg.norm(state.x - state.x_load, axis=1), 1.0, atol=1e-15)

    def test_first_vehicle_height(self, params3):
        state = sl.reference_initial_conditions(params3)
        assert np.isclose(state.x[0][2], np.cos(np.pi / 6), atol=1e-12)

    def test_all_at_rest_identity_attitude(self, params3):
        state = sl.reference_initial_conditions(params3)
        assert np.allclose(state.v, 0) and np.allclose(state.omega, 0)
        assert np.allclose(state.q, np.tile([1.0, 0, 0, 0], (3, 1)))


class TestHoverEquilibrium:
    def test_constraint_exact(self, params3):
        state, _ = sl.hover_equilibrium_conditions(params3)
        assert np.allclose(np.linalg.norm(state.x - state.x_load, axis=1), 1.0, atol=1e-15)

    def test_shares_sum_to_weight(self, params3):
        _, alloc = sl.hover_equilibrium_conditions(params3)
        u_load = np.array([0, 0, -0.225 * 9.81])
        tv = alloc.allocate(u_load)
        tensions = np.linalg.norm(tv, axis=1)
        assert np.allclose(tensions, 0.8495709211125343, atol=1e-12)


class TestConfig:
    def test_empty_document_gives_reference_defaults(self):
        cfg = load_config({})
        assert cfg.n == 3
        assert cfg.load_mass == 0.225
        assert cfg.vehicle_mass == 0.5
        assert cfg.cable_length == 1.0
        assert cfg.dt == 1e-3
        assert cfg.duration == 20.0
        assert tuple(cfg.gains["kp_veh"]) == (40.0, 40.0, 60.0)
        assert tuple(cfg.gains["kd_veh"]) == (10.0, 10.0, 12.0)
        assert tuple(cfg.gains["ki_veh"]) == (2.0, 2.0, 4.0)
        assert tuple(cfg.gains["kp_load"]) == (9.0, 9.0, 9.0)
        assert cfg.gains["kd_att"] == 16.0
        assert cfg.trajectory["type"] == "spiral"
        assert cfg.allocation["strategy"] == "reference-fixed-share"

    def test_negative_load_mass_names_field(self):
        with pytest.raises(ConfigError, match="load.mass"):
            load_config({"load": {"mass": -1.0}})

    def test_dt_override_reaches_integrator(self):
        cfg = load_config({"dt": 5e-4, "duration": 0.01})
        res = sl.run_simulation(sl.build_scenario(cfg))
        assert res.log.steps == 20
        assert np.isclose(res.log.t[1] - res.log.t[0], 5e-4)

    def test_dt_ceiling(self):
        with pytest.raises(ConfigError, match="dt"):
            load_config({"dt": 0.02})

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown"):
            load_config({"massive": 1})

    def test_unknown_gain_rejected(self):
        with pytest.raises(ConfigError, match="gains.k_foo"):
            load_config({"gains": {"k_foo": 1.0}})

    def test_round_trip(self):
        doc = {
            "n": 3,
            "duration": 1.5,
            "dt": 2e-3,
            "gains": {"kp_load": [8.0, 8.0, 8.0]},
            "trajectory": {"type": "hover", "point": [0, 0, 1.0]},
        }
        cfg = load_config(doc)
        again = load_config(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    def test_reference_preset_requires_three_vehicles(self):
        with pytest.raises(ConfigError):
            load_config({"n": 2})  # default initial preset is the 3-vehicle formation

    def test_single_vehicle_explicit_config(self):
        cfg = load_config({
            "n": 1,
            "duration": 0.1,
            "trajectory": {"type": "hover", "point": [0, 0, 0]},
            "allocation": {"strategy": "uniform"},
            "initial": {"vehicle_positions": [[0, 0, 1.0]]},
        })
        res = sl.run_simulation(sl.build_scenario(cfg))
        assert res.log.steps == 100

    def test_explicit_initial_constraint_violation(self, params3):
        with pytest.raises(ConfigError, match="cable constraint"):
            explicit_initial_conditions(
                params3, {"vehicle_positions": [[0, 0, 1.1], [0, 0, 1.0], [0, 0, 1.0]]}
            )

    def test_thrust_ceiling_roundtrip(self):
        cfg = load_config({"thrust_ceiling": 12.0})
        assert sl.build_scenario(cfg).params.thrust_ceiling == 12.0
