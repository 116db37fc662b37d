"""Hierarchical control stack: load virtual control, tension allocation,
per-vehicle position control, thrust/attitude extraction and quaternion
attitude control.

Sign convention (load level): the virtual load control equals the sum of the
desired cable tension vectors, ``u_L = sum_i T_id alpha_id``.  This is the
unique choice under which the hover equilibrium, the per-vehicle control law
and the fixed gravity shares of the reference scenario are simultaneously
consistent; the residual share therefore reads
``T_n alpha_nd = u_L - sum_{i<n} T_i alpha_id``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import E3, PlantInputs, SystemParams, SystemState, cable_directions
from .errors import ConfigError, ThrustSingularityError
from .quat import quat_error_batch

TENSION_FLOOR = 1e-6        # below this a desired cable direction is undefined (N)
EXTRACTION_MARGIN = 1e-6    # guard band around the straight-down thrust singularity


def _diag3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        v = np.full(3, float(v))
    if v.shape != (3,):
        raise ConfigError(f"{name} must be a scalar or a 3-vector of diagonal entries")
    return v


@dataclass
class ControllerGains:
    """All gain matrices (diagonals stored as 3-vectors) plus the attitude gains."""

    kp_load: np.ndarray
    kd_load: np.ndarray
    ki_load: np.ndarray
    kp_veh: np.ndarray
    kd_veh: np.ndarray
    ki_veh: np.ndarray
    rho: np.ndarray                 # manifold gain, positive diagonal
    kd_att: np.ndarray              # K_d, positive definite 3x3
    beta: np.ndarray                # saturation amplitude, diagonal >= 0
    gamma: np.ndarray               # saturation slope, positive diagonal

    def __post_init__(self):
        for name in ("kp_load", "kd_load", "ki_load", "kp_veh", "kd_veh", "ki_veh", "rho", "gamma"):
            v = _diag3(getattr(self, name), name)
            if np.any(v <= 0):
                raise ConfigError(f"{name} diagonal entries must be positive")
            setattr(self, name, v)
        self.beta = _diag3(self.beta, "beta")
        if np.any(self.beta < 0):
            raise ConfigError("beta diagonal entries must be non-negative")
        k = np.asarray(self.kd_att, dtype=float)
        if k.ndim == 0:
            k = float(k) * np.eye(3)
        elif k.shape == (3,):
            k = np.diag(k)
        if k.shape != (3, 3) or np.any(np.linalg.eigvalsh(0.5 * (k + k.T)) <= 0):
            raise ConfigError("kd_att must be a positive definite matrix")
        self.kd_att = k


@dataclass
class ReferenceSample:
    """Desired load position, velocity and acceleration at one instant."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.acceleration = np.asarray(self.acceleration, dtype=float)
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))
                and np.all(np.isfinite(self.acceleration))):
            raise ValueError("reference sample must be finite")


@dataclass
class AgentCommands:
    """Per-vehicle outputs of one controller tick (arrays over vehicles)."""

    thrust: np.ndarray            # (n,) f_id
    attitude: np.ndarray          # (n, 4) desired quaternions
    body_rate: np.ndarray         # (n, 3) desired body rates
    thrust_vec: np.ndarray        # (n, 3) u_id = f_id R_id e3
    tension_vec: np.ndarray       # (n, 3) desired T_id alpha_id
    tension: np.ndarray           # (n,)
    cable_dir: np.ndarray         # (n, 3) desired alpha_id
    position: np.ndarray          # (n, 3) desired x_id
    load_control: np.ndarray      # (3,) u_L


class ControllerState:
    """Integrators and differentiation history owned by one simulation run."""

    def __init__(
        self,
        n: int,
        integral_limit: float = 10.0,
        filter_cutoff: float = 50.0,
        tension_floor: float = TENSION_FLOOR,
    ):
        self.n = n
        self.integral_limit = float(integral_limit)
        self.filter_cutoff = float(filter_cutoff)
        self.tension_floor = float(tension_floor)
        self.tick = 0
        self.load_integral = np.zeros(3)
        self.veh_integral = np.zeros((n, 3))
        self.prev_load_err = np.zeros(3)
        self.prev_veh_err = np.zeros((n, 3))
        self.prev_alpha_d: np.ndarray | None = None   # (n, 3)
        self.prev_u_hat = np.zeros((n, 3))
        self.alpha_d_rate = np.zeros((n, 3))          # low-pass filtered backward differences
        self.u_hat_rate = np.zeros((n, 3))


def load_control(
    x_load: np.ndarray,
    v_load: np.ndarray,
    integral: np.ndarray,
    ref: ReferenceSample,
    gains: ControllerGains,
    load_mass: float,
    gravity: float = 9.81,
) -> np.ndarray:
    """Virtual load control u_L (the desired resultant cable tension)."""
    nu = (
        -gains.kp_load * (x_load - ref.position)
        - gains.kd_load * (v_load - ref.velocity)
        - gains.ki_load * integral
    )
    return -load_mass * (gravity * E3 + ref.acceleration) - nu


class UniformAllocation:
    """Split u_L equally among the n cables."""

    name = "uniform"

    def __init__(self, n: int):
        self.n = n

    def allocate(self, u_load: np.ndarray) -> np.ndarray:
        return np.tile(u_load / self.n, (self.n, 1))


class MinNormAllocation:
    """Minimum-norm allocation of the stacked tension vectors.

    With only the resultant constraint the least-squares solution through the
    pseudo-inverse coincides with the uniform split; kept as a separate
    strategy so additional constraints can be layered on later.
    """

    name = "min-norm"

    def __init__(self, n: int):
        self.n = n
        # pinv of the 3 x 3n horizontal stack of identities
        self._pinv = np.linalg.pinv(np.hstack([np.eye(3)] * n))

    def allocate(self, u_load: np.ndarray) -> np.ndarray:
        return (self._pinv @ u_load).reshape(self.n, 3)


class FixedShareAllocation:
    """Constant tension shares for agents 1..n-1; agent n takes the residual."""

    name = "fixed-share"

    def __init__(self, shares: np.ndarray, n: int):
        shares = np.asarray(shares, dtype=float)
        if shares.shape != (n - 1, 3):
            raise ConfigError(f"fixed-share allocation needs {n - 1} share vectors, got shape {shares.shape}")
        self.shares = shares
        self.n = n

    def allocate(self, u_load: np.ndarray) -> np.ndarray:
        out = np.empty((self.n, 3))
        out[:-1] = self.shares
        out[-1] = u_load - self.shares.sum(axis=0)
        return out


def reference_fixed_share(load_mass: float, gravity: float, n: int) -> FixedShareAllocation:
    """The reference scenario's constant gravity shares (agents 1 and 2).

    Only defined for n = 3.
    """
    from .quat import basic_rotation

    if n != 3:
        raise ConfigError("reference-fixed-share allocation requires n = 3")
    ge3 = gravity * E3
    s1 = -(load_mass / 3.0) * basic_rotation("z", -np.pi / 4) @ basic_rotation("y", -np.pi / 6) @ ge3
    s2 = -(load_mass / 3.0) * basic_rotation("z", np.pi / 4) @ basic_rotation("y", -np.pi / 6) @ ge3
    return FixedShareAllocation(np.stack([s1, s2]), n)


def allocate_tensions(u_load: np.ndarray, strategy) -> np.ndarray:
    """Desired tension vectors T_id alpha_id summing exactly to u_L."""
    return strategy.allocate(np.asarray(u_load, dtype=float))


def desired_vehicle_position(
    ref: ReferenceSample,
    tension_vec: np.ndarray,
    length: float,
    prev_dir: np.ndarray | None = None,
    floor: float = TENSION_FLOOR,
):
    """Decompose a desired tension vector into (x_id, alpha_id, T_id).

    Near-zero tension leaves the cable direction undefined; the previous
    direction is held in that case (an error if there is none).
    """
    tension_vec = np.asarray(tension_vec, dtype=float)
    t = float(np.linalg.norm(tension_vec))
    if t <= floor:
        if prev_dir is None:
            raise ConfigError("desired tension below floor with no previous cable direction to hold")
        alpha_d = prev_dir
    else:
        alpha_d = tension_vec / t
    return ref.position - length * alpha_d, alpha_d, t


def vehicle_position_control(
    x: np.ndarray,
    v: np.ndarray,
    integral: np.ndarray,
    ref: ReferenceSample,
    alpha_d: np.ndarray,
    alpha_d_rate: np.ndarray,
    tension_vec: np.ndarray,
    gains: ControllerGains,
    mass: float,
    length: float,
    gravity: float = 9.81,
) -> np.ndarray:
    """Per-vehicle virtual control u_id (the desired thrust vector)."""
    pos_err = x - ref.position + length * alpha_d
    vel_err = v - ref.velocity + length * alpha_d_rate
    nu = -gains.kp_veh * pos_err - gains.kd_veh * vel_err - gains.ki_veh * integral
    return mass * (gravity * E3 + ref.acceleration) - tension_vec + nu


def attitude_extraction(u_d: np.ndarray):
    """Thrust magnitude and zero-yaw desired quaternion realizing u_id.

    Raises near the straight-down singularity (the vehicle would have to
    point its thrust axis straight down) and for near-zero thrust.
    """
    u_d = np.asarray(u_d, dtype=float)
    f = float(np.linalg.norm(u_d))
    if f <= 1e-6:
        raise ThrustSingularityError("commanded thrust magnitude below 1e-6 N")
    u_hat = u_d / f
    if u_hat[2] <= -1.0 + EXTRACTION_MARGIN:
        raise ThrustSingularityError("commanded thrust direction too close to straight down")
    root = np.sqrt(2.0 * u_hat[2] + 2.0)
    q = np.array([0.5 * root, -u_hat[1] / root, u_hat[0] / root, 0.0])
    return f, q


def desired_rate(u_hat: np.ndarray, u_hat_rate: np.ndarray) -> np.ndarray:
    """Desired body rate consistent with the zero-yaw attitude extraction.

    The yaw-rate component is pinned by the zero-yaw constraint of the
    extraction; its sign is fixed by requiring dq/dt = 1/2 q ⊗ [0, omega]
    to hold for the extracted quaternion.
    """
    if u_hat[2] <= -1.0 + EXTRACTION_MARGIN:
        raise ThrustSingularityError("thrust direction too close to straight down")
    d = u_hat[2] + 1.0
    return np.array(
        [
            -u_hat_rate[1] + u_hat_rate[2] * u_hat[1] / d,
            u_hat_rate[0] - u_hat_rate[2] * u_hat[0] / d,
            (u_hat[1] * u_hat_rate[0] - u_hat[0] * u_hat_rate[1]) / d,
        ]
    )


def attitude_control(q_err: np.ndarray, rate_err: np.ndarray, gains: ControllerGains) -> np.ndarray:
    """Torque -K_d s - beta sat(gamma s) on the manifold s = rate_err + rho q_err."""
    s = rate_err + gains.rho * np.asarray(q_err, dtype=float)[1:]
    return -gains.kd_att @ s - gains.beta * np.clip(gains.gamma * s, -1.0, 1.0)


def controller_step(
    state: SystemState,
    ctrl: ControllerState,
    ref: ReferenceSample,
    gains: ControllerGains,
    params: SystemParams,
    allocation,
    dt: float,
):
    """One tick of the full hierarchy; mutates ``ctrl`` (integrators, histories).

    Returns ``(PlantInputs, AgentCommands)``.  Thrust is commanded
    instantaneously (f_i = f_id); the attitude loop realizes the direction.
    """
    n = params.n
    g = params.gravity

    # load level
    load_err = state.x_load - ref.position
    if ctrl.tick > 0:
        ctrl.load_integral += 0.5 * dt * (ctrl.prev_load_err + load_err)
        np.clip(ctrl.load_integral, -ctrl.integral_limit, ctrl.integral_limit, out=ctrl.load_integral)
    u_load = load_control(state.x_load, state.v_load, ctrl.load_integral, ref, gains, params.load_mass, g)
    tension_vecs = allocate_tensions(u_load, allocation)

    # desired geometry per vehicle
    if ctrl.prev_alpha_d is None:
        ctrl.prev_alpha_d = cable_directions(state, params)
    tensions_d = np.linalg.norm(tension_vecs, axis=1)
    alpha_d = np.where(
        (tensions_d > ctrl.tension_floor)[:, None],
        tension_vecs / np.maximum(tensions_d, ctrl.tension_floor)[:, None],
        ctrl.prev_alpha_d,
    )
    x_d = ref.position[None, :] - params.lengths[:, None] * alpha_d

    # filtered backward differences (zero on the first tick)
    a_filt = dt / (dt + 1.0 / ctrl.filter_cutoff)
    if ctrl.tick > 0:
        raw = (alpha_d - ctrl.prev_alpha_d) / dt
        ctrl.alpha_d_rate += a_filt * (raw - ctrl.alpha_d_rate)

    # vehicle position loops
    veh_err = state.x - ref.position[None, :] + params.lengths[:, None] * alpha_d
    if ctrl.tick > 0:
        ctrl.veh_integral += 0.5 * dt * (ctrl.prev_veh_err + veh_err)
        np.clip(ctrl.veh_integral, -ctrl.integral_limit, ctrl.integral_limit, out=ctrl.veh_integral)
    vel_err = state.v - ref.velocity[None, :] + params.lengths[:, None] * ctrl.alpha_d_rate
    nu = -gains.kp_veh * veh_err - gains.kd_veh * vel_err - gains.ki_veh * ctrl.veh_integral
    u_d = params.masses[:, None] * (g * E3 + ref.acceleration)[None, :] - tension_vecs + nu

    # thrust/attitude extraction and desired rates (batched forms of the
    # single-vehicle operations below)
    f_d = np.sqrt(np.einsum("ij,ij->i", u_d, u_d))
    if np.any(f_d <= 1e-6):
        raise ThrustSingularityError("commanded thrust magnitude below 1e-6 N")
    u_hat = u_d / f_d[:, None]
    if np.any(u_hat[:, 2] <= -1.0 + EXTRACTION_MARGIN):
        raise ThrustSingularityError("commanded thrust direction too close to straight down")
    root = np.sqrt(2.0 * u_hat[:, 2] + 2.0)
    q_d = np.empty((n, 4))
    q_d[:, 0] = 0.5 * root
    q_d[:, 1] = -u_hat[:, 1] / root
    q_d[:, 2] = u_hat[:, 0] / root
    q_d[:, 3] = 0.0
    if ctrl.tick > 0:
        raw = (u_hat - ctrl.prev_u_hat) / dt
        ctrl.u_hat_rate += a_filt * (raw - ctrl.u_hat_rate)
    ur = ctrl.u_hat_rate
    denom = u_hat[:, 2] + 1.0
    omega_d = np.empty((n, 3))
    omega_d[:, 0] = -ur[:, 1] + ur[:, 2] * u_hat[:, 1] / denom
    omega_d[:, 1] = ur[:, 0] - ur[:, 2] * u_hat[:, 0] / denom
    omega_d[:, 2] = (u_hat[:, 1] * ur[:, 0] - u_hat[:, 0] * ur[:, 1]) / denom
    q_err = quat_error_batch(q_d, state.q)
    s = (state.omega - omega_d) + gains.rho * q_err[:, 1:]
    torque = -(s @ gains.kd_att.T) - gains.beta * np.clip(gains.gamma * s, -1.0, 1.0)

    # history for the next tick
    ctrl.prev_load_err = load_err
    ctrl.prev_veh_err = veh_err
    ctrl.prev_alpha_d = alpha_d
    ctrl.prev_u_hat = u_hat
    ctrl.tick += 1

    commands = AgentCommands(
        thrust=f_d,
        attitude=q_d,
        body_rate=omega_d,
        thrust_vec=u_d,
        tension_vec=tension_vecs,
        tension=tensions_d,
        cable_dir=alpha_d,
        position=x_d,
        load_control=u_load,
    )
    return PlantInputs(thrust=f_d.copy(), torque=torque), commands
