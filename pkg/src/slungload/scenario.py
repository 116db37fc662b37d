"""Reference trajectories, initial conditions and configuration ingestion.

Defaults reproduce the reference three-UAV experiment: identical 0.5 kg
vehicles on 1 m cables, a 0.225 kg load, the ascending-spiral reference and
the tilted initial formation.  An empty config document yields exactly that
scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .controller import (
    ControllerGains,
    ControllerState,
    FixedShareAllocation,
    MinNormAllocation,
    ReferenceSample,
    UniformAllocation,
    attitude_extraction,
    reference_fixed_share,
)
from .dynamics import E3, SystemParams, SystemState, VehicleParams
from .errors import ConfigError
from .quat import basic_rotation

# reference-scenario parameter set (SI units)
DEFAULT_VEHICLE_MASS = 0.5
DEFAULT_LOAD_MASS = 0.225
DEFAULT_INERTIA_DIAG = (0.0232, 0.0232, 0.04)     # 0.01 * diag(2.32, 2.32, 4)
DEFAULT_CABLE_LENGTH = 1.0
DEFAULT_GRAVITY = 9.81

# Position-loop gains in a config are mass-normalized error-feedback
# coefficients (the per-axis coefficients of the translational error
# dynamics); the scenario builder multiplies them by the load/vehicle mass to
# obtain the force-unit gains the control laws use.  Read literally as N/m
# force gains these values put the outer load loop at/above the vehicle-loop
# bandwidth and the rigid-cable closed loop is unstable.  Attitude gains are
# used as printed.
DEFAULT_GAINS = dict(
    kp_load=(9.0, 9.0, 9.0),
    kd_load=(3.5, 3.5, 3.5),
    ki_load=(0.2, 0.2, 0.2),
    kp_veh=(40.0, 40.0, 60.0),       # 40 * [1 1 1.5]
    kd_veh=(10.0, 10.0, 12.0),       # 10 * [1 1 1.2]
    ki_veh=(2.0, 2.0, 4.0),          # 2 * [1 1 2]
    rho=(62.5, 62.5, 62.5),
    kd_att=16.0,
    beta=(0.0, 0.0, 0.0),
    gamma=(1.0, 1.0, 1.0),
)

_LOAD_GAIN_KEYS = ("kp_load", "kd_load", "ki_load")
_VEH_GAIN_KEYS = ("kp_veh", "kd_veh", "ki_veh")

SPIRAL_ANGULAR_RATE = 2.0 * np.pi / 5.0
SPIRAL_RADIUS = 1.0
SPIRAL_CLIMB_RATE = 0.1


class SpiralTrajectory:
    """Ascending spiral [r(1-cos wt), r sin wt, ct] with analytic derivatives."""

    kind = "spiral"

    def __init__(self, radius=SPIRAL_RADIUS, angular_rate=SPIRAL_ANGULAR_RATE, climb_rate=SPIRAL_CLIMB_RATE):
        self.radius = float(radius)
        self.angular_rate = float(angular_rate)
        self.climb_rate = float(climb_rate)

    def sample(self, t: float) -> ReferenceSample:
        r, w, c = self.radius, self.angular_rate, self.climb_rate
        wt = w * t
        return ReferenceSample(
            position=np.array([r * (1.0 - np.cos(wt)), r * np.sin(wt), c * t]),
            velocity=np.array([r * w * np.sin(wt), r * w * np.cos(wt), c]),
            acceleration=np.array([r * w * w * np.cos(wt), -r * w * w * np.sin(wt), 0.0]),
        )


class HoverTrajectory:
    """Constant setpoint."""

    kind = "hover"

    def __init__(self, point=(0.0, 0.0, 0.0)):
        self.point = np.asarray(point, dtype=float)

    def sample(self, t: float) -> ReferenceSample:
        return ReferenceSample(self.point.copy(), np.zeros(3), np.zeros(3))


class LineTrajectory:
    """Straight line with a trapezoidal speed profile between two points."""

    kind = "line"

    def __init__(self, start, end, cruise_speed=0.5, accel=0.5):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self.cruise_speed = float(cruise_speed)
        self.accel = float(accel)
        dist = float(np.linalg.norm(self.end - self.start))
        self._dist = dist
        self._dir = (self.end - self.start) / dist if dist > 0 else np.zeros(3)
        v, a = self.cruise_speed, self.accel
        if v <= 0 or a <= 0:
            raise ConfigError("trajectory.cruise_speed and trajectory.accel must be positive")
        # degenerate to a triangular profile when the line is too short to cruise
        if dist < v * v / a:
            v = np.sqrt(dist * a)
        self._v = v
        self._t_ramp = v / a
        self._t_cruise = max(dist / v - v / a, 0.0)

    def sample(self, t: float) -> ReferenceSample:
        a, v = self.accel, self._v
        t1, t2 = self._t_ramp, self._t_ramp + self._t_cruise
        t3 = t2 + self._t_ramp
        if t < t1:
            s, sd, sdd = 0.5 * a * t * t, a * t, a
        elif t < t2:
            s, sd, sdd = 0.5 * a * t1 * t1 + v * (t - t1), v, 0.0
        elif t < t3:
            dt = t3 - t
            s, sd, sdd = self._dist - 0.5 * a * dt * dt, a * dt, -a
        else:
            s, sd, sdd = self._dist, 0.0, 0.0
        return ReferenceSample(
            self.start + s * self._dir, sd * self._dir, sdd * self._dir
        )


def spiral_reference(t: float) -> ReferenceSample:
    """The reference-scenario spiral at time t."""
    return SpiralTrajectory().sample(t)


def default_vehicle_params() -> VehicleParams:
    return VehicleParams(
        mass=DEFAULT_VEHICLE_MASS,
        inertia=np.diag(DEFAULT_INERTIA_DIAG),
        cable_length=DEFAULT_CABLE_LENGTH,
    )


def default_system_params(n: int = 3, **kwargs) -> SystemParams:
    return SystemParams(DEFAULT_LOAD_MASS, [default_vehicle_params() for _ in range(n)], **kwargs)


def scaled_gains(coeffs: dict, load_mass: float, vehicle_mass: float) -> ControllerGains:
    """Force-unit ControllerGains from mass-normalized coefficient values."""
    resolved = {}
    for key, value in coeffs.items():
        v = np.asarray(value, dtype=float)
        if key in _LOAD_GAIN_KEYS:
            v = v * load_mass
        elif key in _VEH_GAIN_KEYS:
            v = v * vehicle_mass
        resolved[key] = v if v.ndim else float(v)
    return ControllerGains(**resolved)


def default_gains() -> ControllerGains:
    """Force-unit gains of the reference scenario."""
    return scaled_gains(DEFAULT_GAINS, DEFAULT_LOAD_MASS, DEFAULT_VEHICLE_MASS)


# the initial formation: all cables tilted pi/6 from vertical
_REFERENCE_ROTATIONS = (
    ("z", -np.pi / 4, "y", -np.pi / 6),
    ("z", np.pi / 4, "y", -np.pi / 6),
    ("y", np.pi / 6, None, None),
)


def _reference_positions(lengths: np.ndarray) -> np.ndarray:
    pos = np.empty((3, 3))
    for i, (a1, ang1, a2, ang2) in enumerate(_REFERENCE_ROTATIONS):
        r = basic_rotation(a1, ang1)
        if a2 is not None:
            r = r @ basic_rotation(a2, ang2)
        pos[i] = r @ (lengths[i] * E3)
    return pos


def reference_initial_conditions(params: SystemParams) -> SystemState:
    """Load at the origin, vehicles at the tilted cable-top positions, all at rest."""
    if params.n != 3:
        raise ConfigError("the preset initial formation requires n = 3")
    x = _reference_positions(params.lengths)
    q = np.tile(np.array([1.0, 0.0, 0.0, 0.0]), (3, 1))
    return SystemState(
        x_load=np.zeros(3), v_load=np.zeros(3), x=x, v=np.zeros((3, 3)),
        q=q, omega=np.zeros((3, 3)), t=0.0,
    )


def hover_equilibrium_conditions(params: SystemParams):
    """Exact closed-loop hover equilibrium for three vehicles.

    Cables tilted pi/6 from vertical with azimuths 120 degrees apart, so the
    horizontal tension components cancel and every tension equals
    m_L g / (3 cos(pi/6)).  Vehicle attitudes are set to the extracted desired
    attitudes so the state is a fixed point of the full closed loop.

    Returns ``(state, allocation)`` where the allocation holds the matching
    constant shares for agents 1 and 2 (agent 3 takes the residual).
    """
    if params.n != 3:
        raise ConfigError("the hover equilibrium preset requires n = 3")
    g = params.gravity
    tilt = np.pi / 6
    azimuths = (-np.pi / 3, np.pi / 3, np.pi)
    dirs = np.stack(
        [basic_rotation("z", az) @ basic_rotation("y", -tilt) @ E3 for az in azimuths]
    )
    x = params.lengths[:, None] * dirs
    tension = params.load_mass * g / (3.0 * np.cos(tilt))
    q = np.empty((3, 4))
    for i in range(3):
        u_d = params.masses[i] * g * E3 + tension * dirs[i]
        _, q[i] = attitude_extraction(u_d)
    state = SystemState(
        x_load=np.zeros(3), v_load=np.zeros(3), x=x, v=np.zeros((3, 3)),
        q=q, omega=np.zeros((3, 3)), t=0.0,
    )
    shares = -tension * dirs[:2]
    return state, FixedShareAllocation(shares, 3)


def explicit_initial_conditions(params: SystemParams, spec: dict) -> SystemState:
    """Build a state from explicit poses, validating the cable constraint."""
    x_load = np.asarray(spec.get("load_position", (0.0, 0.0, 0.0)), dtype=float)
    v_load = np.asarray(spec.get("load_velocity", (0.0, 0.0, 0.0)), dtype=float)
    if "vehicle_positions" not in spec:
        raise ConfigError("initial.vehicle_positions is required for explicit initial conditions")
    x = np.asarray(spec["vehicle_positions"], dtype=float)
    if x.shape != (params.n, 3):
        raise ConfigError(f"initial.vehicle_positions must be {params.n} 3-vectors")
    v = np.asarray(spec.get("vehicle_velocities", np.zeros((params.n, 3))), dtype=float)
    q = np.asarray(
        spec.get("vehicle_attitudes", np.tile([1.0, 0.0, 0.0, 0.0], (params.n, 1))), dtype=float
    )
    omega = np.asarray(spec.get("vehicle_rates", np.zeros((params.n, 3))), dtype=float)
    if v.shape != (params.n, 3) or omega.shape != (params.n, 3) or q.shape != (params.n, 4):
        raise ConfigError("initial vehicle state arrays have inconsistent shapes")
    residual = np.abs(np.linalg.norm(x - x_load[None, :], axis=1) - params.lengths)
    if np.any(residual > 1e-9):
        raise ConfigError(
            f"initial.vehicle_positions violate the cable constraint (max residual {residual.max():.3e} m)"
        )
    norms = np.linalg.norm(q, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ConfigError("initial.vehicle_attitudes must be unit quaternions")
    return SystemState(x_load, v_load, x, v, q, omega, 0.0)


@dataclass
class ScenarioConfig:
    """Validated scenario description; all fields carry SI units."""

    n: int = 3
    gravity: float = DEFAULT_GRAVITY
    load_mass: float = DEFAULT_LOAD_MASS
    vehicle_mass: float = DEFAULT_VEHICLE_MASS
    inertia_diag: tuple = DEFAULT_INERTIA_DIAG
    cable_length: float = DEFAULT_CABLE_LENGTH
    gains: dict = field(default_factory=lambda: dict(DEFAULT_GAINS))
    trajectory: dict = field(default_factory=lambda: {"type": "spiral"})
    allocation: dict = field(default_factory=lambda: {"strategy": "reference-fixed-share"})
    initial: dict = field(default_factory=lambda: {"preset": "reference"})
    dt: float = 1e-3
    duration: float = 20.0
    baumgarte_omega: float = 20.0
    baumgarte_zeta: float = 1.0
    thrust_ceiling: float | None = None
    integral_limit: float = 10.0
    filter_cutoff: float = 50.0
    tension_floor: float = 1e-6

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gravity": self.gravity,
            "load": {"mass": self.load_mass},
            "vehicle": {
                "mass": self.vehicle_mass,
                "inertia_diag": list(self.inertia_diag),
                "cable_length": self.cable_length,
            },
            "gains": {k: (list(v) if isinstance(v, (tuple, list)) else v) for k, v in self.gains.items()},
            "trajectory": dict(self.trajectory),
            "allocation": dict(self.allocation),
            "initial": dict(self.initial),
            "dt": self.dt,
            "duration": self.duration,
            "baumgarte": {"omega": self.baumgarte_omega, "zeta": self.baumgarte_zeta},
            "thrust_ceiling": self.thrust_ceiling,
            "integral_limit": self.integral_limit,
            "filter_cutoff": self.filter_cutoff,
            "tension_floor": self.tension_floor,
        }


def _require_positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {value!r}") from None
    if not np.isfinite(v) or v <= 0:
        raise ConfigError(f"{path} must be positive, got {value!r}")
    return v


def load_config(doc: dict | None) -> ScenarioConfig:
    """Validate a JSON-compatible key tree; unspecified fields take the defaults."""
    doc = dict(doc or {})
    cfg = ScenarioConfig()

    known = {
        "n", "gravity", "load", "vehicle", "gains", "trajectory", "allocation",
        "initial", "dt", "duration", "baumgarte", "thrust_ceiling",
        "integral_limit", "filter_cutoff", "tension_floor",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    if "n" in doc:
        if not isinstance(doc["n"], int) or doc["n"] < 1:
            raise ConfigError(f"n must be an integer >= 1, got {doc['n']!r}")
        cfg.n = doc["n"]
    if "gravity" in doc:
        cfg.gravity = _require_positive(doc["gravity"], "gravity")
    if "load" in doc:
        if "mass" in doc["load"]:
            cfg.load_mass = _require_positive(doc["load"]["mass"], "load.mass")
    if "vehicle" in doc:
        veh = doc["vehicle"]
        if "mass" in veh:
            cfg.vehicle_mass = _require_positive(veh["mass"], "vehicle.mass")
        if "cable_length" in veh:
            cfg.cable_length = _require_positive(veh["cable_length"], "vehicle.cable_length")
        if "inertia_diag" in veh:
            diag = veh["inertia_diag"]
            if len(diag) != 3:
                raise ConfigError("vehicle.inertia_diag must have 3 entries")
            cfg.inertia_diag = tuple(_require_positive(d, "vehicle.inertia_diag") for d in diag)
    if "gains" in doc:
        for key, value in doc["gains"].items():
            if key not in DEFAULT_GAINS:
                raise ConfigError(f"gains.{key} is not a known gain")
            cfg.gains[key] = tuple(value) if isinstance(value, (list, tuple)) else value
    if "trajectory" in doc:
        cfg.trajectory = dict(doc["trajectory"])
    if "allocation" in doc:
        cfg.allocation = dict(doc["allocation"])
    if "initial" in doc:
        cfg.initial = dict(doc["initial"])
    if "dt" in doc:
        cfg.dt = _require_positive(doc["dt"], "dt")
    if "duration" in doc:
        cfg.duration = _require_positive(doc["duration"], "duration")
    if "baumgarte" in doc:
        if "omega" in doc["baumgarte"]:
            cfg.baumgarte_omega = _require_positive(doc["baumgarte"]["omega"], "baumgarte.omega")
        if "zeta" in doc["baumgarte"]:
            cfg.baumgarte_zeta = _require_positive(doc["baumgarte"]["zeta"], "baumgarte.zeta")
    if doc.get("thrust_ceiling") is not None:
        cfg.thrust_ceiling = _require_positive(doc["thrust_ceiling"], "thrust_ceiling")
    if "integral_limit" in doc:
        cfg.integral_limit = _require_positive(doc["integral_limit"], "integral_limit")
    if "filter_cutoff" in doc:
        cfg.filter_cutoff = _require_positive(doc["filter_cutoff"], "filter_cutoff")
    if "tension_floor" in doc:
        cfg.tension_floor = _require_positive(doc["tension_floor"], "tension_floor")

    if cfg.dt > 0.01:
        raise ConfigError(f"dt must be in (0, 0.01], got {cfg.dt}")

    # validate the pieces eagerly so errors carry field paths
    build_scenario(cfg)
    return cfg


def config_from_file(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return load_config(doc)


@dataclass
class Scenario:
    """Runtime objects assembled from a validated config."""

    config: ScenarioConfig
    params: SystemParams
    gains: ControllerGains
    trajectory: Any
    allocation: Any
    initial_state: SystemState

    def make_controller_state(self) -> ControllerState:
        c = self.config
        return ControllerState(
            self.params.n,
            integral_limit=c.integral_limit,
            filter_cutoff=c.filter_cutoff,
            tension_floor=c.tension_floor,
        )


def _build_trajectory(spec: dict):
    kind = spec.get("type", "spiral")
    if kind == "spiral":
        return SpiralTrajectory(
            radius=spec.get("radius", SPIRAL_RADIUS),
            angular_rate=spec.get("angular_rate", SPIRAL_ANGULAR_RATE),
            climb_rate=spec.get("climb_rate", SPIRAL_CLIMB_RATE),
        )
    if kind == "hover":
        return HoverTrajectory(spec.get("point", (0.0, 0.0, 0.0)))
    if kind == "line":
        if "start" not in spec or "end" not in spec:
            raise ConfigError("trajectory.start and trajectory.end are required for a line trajectory")
        return LineTrajectory(
            spec["start"], spec["end"],
            cruise_speed=spec.get("cruise_speed", 0.5), accel=spec.get("accel", 0.5),
        )
    raise ConfigError(f"trajectory.type must be one of spiral|hover|line, got {kind!r}")


def _build_allocation(spec: dict, params: SystemParams):
    strategy = spec.get("strategy", "reference-fixed-share")
    if strategy == "reference-fixed-share":
        return reference_fixed_share(params.load_mass, params.gravity, params.n)
    if strategy == "uniform":
        return UniformAllocation(params.n)
    if strategy == "min-norm":
        return MinNormAllocation(params.n)
    if strategy == "fixed-share":
        if "shares" not in spec:
            raise ConfigError("allocation.shares is required for the fixed-share strategy")
        return FixedShareAllocation(np.asarray(spec["shares"], dtype=float), params.n)
    if strategy == "symmetric-fixed-share":
        _, alloc = hover_equilibrium_conditions(params)
        return alloc
    raise ConfigError(
        "allocation.strategy must be one of reference-fixed-share|uniform|min-norm|"
        f"fixed-share|symmetric-fixed-share, got {strategy!r}"
    )


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Assemble the runtime parameter/trajectory/state objects for a config."""
    vehicle = VehicleParams(
        mass=config.vehicle_mass,
        inertia=np.diag(config.inertia_diag),
        cable_length=config.cable_length,
    )
    params = SystemParams(
        load_mass=config.load_mass,
        vehicles=[vehicle] * config.n,
        gravity=config.gravity,
        baumgarte_omega=config.baumgarte_omega,
        baumgarte_zeta=config.baumgarte_zeta,
        thrust_ceiling=config.thrust_ceiling,
    )
    try:
        gains = scaled_gains(config.gains, config.load_mass, config.vehicle_mass)
    except ConfigError as exc:
        raise ConfigError(f"gains: {exc}") from None
    trajectory = _build_trajectory(config.trajectory)
    allocation = _build_allocation(config.allocation, params)

    preset = config.initial.get("preset")
    if preset == "reference":
        state = reference_initial_conditions(params)
    elif preset == "hover_equilibrium":
        state, _ = hover_equilibrium_conditions(params)
    elif preset is None:
        state = explicit_initial_conditions(params, config.initial)
    else:
        raise ConfigError(f"initial.preset must be reference|hover_equilibrium or absent, got {preset!r}")
    return Scenario(config, params, gains, trajectory, allocation, state)
