"""Constrained dynamics of n quadrotors carrying a point-mass load on rigid cables.

The cables are enforced as holonomic constraints: per derivative evaluation
the tension magnitudes solve the linear system obtained by differentiating
0.5 * (||x_i - x_L||^2 - L_i^2) = 0 twice and substituting the translational
dynamics of the vehicles and the load.  Baumgarte feedback on the constraint
position/velocity residuals suppresses numerical drift.

The integrator core is numba-compiled; a 20 s reference run takes a few
seconds.  Errors surface as status codes from the kernel and are re-raised
as typed exceptions by the wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DegenerateGeometryError, IntegrationDivergenceError, TensionSolveError

E3 = np.array([0.0, 0.0, 1.0])

COND_LIMIT = 1e12          # tension system condition-number error threshold
RESIDUAL_SOFT = 1e-6       # constraint residual expected in normal operation (m)
RESIDUAL_HARD = 1e-4       # beyond this the integration is considered diverged (m)

_STATUS_OK = 0
_STATUS_DEGENERATE = 1
_STATUS_SINGULAR = 2


@dataclass(frozen=True)
class VehicleParams:
    """Mass (kg), 3x3 inertia (kg m^2) and cable length (m) of one vehicle."""

    mass: float
    inertia: np.ndarray
    cable_length: float

    def __post_init__(self):
        object.__setattr__(self, "inertia", np.asarray(self.inertia, dtype=float))
        if self.mass <= 0:
            raise ValueError("vehicle mass must be positive")
        if self.cable_length <= 0:
            raise ValueError("cable length must be positive")
        j = self.inertia
        if j.shape != (3, 3) or not np.allclose(j, j.T, atol=1e-12):
            raise ValueError("inertia must be a symmetric 3x3 matrix")
        if np.any(np.linalg.eigvalsh(j) <= 0):
            raise ValueError("inertia must be positive definite")


class SystemParams:
    """Immutable parameter bundle for one load + n vehicles.

    Precomputes the stacked arrays the derivative kernel needs.
    """

    def __init__(
        self,
        load_mass: float,
        vehicles: list[VehicleParams] | tuple[VehicleParams, ...],
        gravity: float = 9.81,
        baumgarte_omega: float = 20.0,
        baumgarte_zeta: float = 1.0,
        thrust_ceiling: float | None = None,
    ):
        if load_mass <= 0:
            raise ValueError("load mass must be positive")
        if len(vehicles) < 1:
            raise ValueError("at least one vehicle required")
        self.load_mass = float(load_mass)
        self.vehicles = tuple(vehicles)
        self.gravity = float(gravity)
        self.baumgarte_omega = float(baumgarte_omega)
        self.baumgarte_zeta = float(baumgarte_zeta)
        self.thrust_ceiling = thrust_ceiling
        self.n = len(vehicles)
        self.masses = np.array([v.mass for v in vehicles])
        self.lengths = np.array([v.cable_length for v in vehicles])
        self.inertias = np.stack([v.inertia for v in vehicles])
        self.inertias_inv = np.linalg.inv(self.inertias)

    @property
    def _ceiling(self) -> float:
        return np.inf if self.thrust_ceiling is None else float(self.thrust_ceiling)


@dataclass
class SystemState:
    """Full state: load position/velocity plus 13 states per vehicle."""

    x_load: np.ndarray           # (3,)
    v_load: np.ndarray           # (3,)
    x: np.ndarray                # (n, 3)
    v: np.ndarray                # (n, 3)
    q: np.ndarray                # (n, 4) unit quaternions, scalar first
    omega: np.ndarray            # (n, 3) body rates
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def copy(self) -> "SystemState":
        return SystemState(
            self.x_load.copy(), self.v_load.copy(), self.x.copy(),
            self.v.copy(), self.q.copy(), self.omega.copy(), self.t,
        )

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.x_load, self.v_load, self.x.ravel(), self.v.ravel(),
             self.q.ravel(), self.omega.ravel()]
        )

    @classmethod
    def from_vector(cls, y: np.ndarray, n: int, t: float) -> "SystemState":
        i = 6
        x = y[i:i + 3 * n].reshape(n, 3); i += 3 * n
        v = y[i:i + 3 * n].reshape(n, 3); i += 3 * n
        q = y[i:i + 4 * n].reshape(n, 4); i += 4 * n
        om = y[i:i + 3 * n].reshape(n, 3)
        return cls(y[0:3], y[3:6], x, v, q, om, t)


@dataclass
class PlantInputs:
    """Collective thrusts f_i (N) and body torques tau_i (N m)."""

    thrust: np.ndarray           # (n,)
    torque: np.ndarray           # (n, 3)


@dataclass
class DynamicsInfo:
    """Diagnostics from one derivative evaluation (used for logging)."""

    tensions: np.ndarray         # (n,)
    cable_dirs: np.ndarray       # (n, 3) unit vectors vehicle -> load
    thrust_vectors: np.ndarray   # (n, 3) f_i R_i e3 after clamping
    slack: np.ndarray            # (n,) bool, computed tension <= 0
    residual: float = 0.0        # max | ||x_i - x_L|| - L_i | at the evaluated state


def cable_directions(state: SystemState, params: SystemParams) -> np.ndarray:
    """Unit vectors from each vehicle toward the load."""
    rel = state.x_load[None, :] - state.x
    dist = np.linalg.norm(rel, axis=1)
    if np.any(dist < 1e-6):
        raise DegenerateGeometryError("vehicle coincident with load; cable direction undefined")
    return rel / dist[:, None]


def _solve_tensions(
    alpha: np.ndarray,
    rel: np.ndarray,
    dist: np.ndarray,
    vrel: np.ndarray,
    thrust_vectors: np.ndarray,
    params: SystemParams,
) -> np.ndarray:
    """Solve M T = b for the cable tensions (reference numpy form).

    ``rel = x_i - x_L`` (note: opposite of alpha), ``vrel = v_i - v_L``.
    M is SPD (positive diagonal plus a scaled Gram matrix of unit vectors);
    its minimum eigenvalue is checked on every call.
    """
    m = np.diag(1.0 / params.masses) + (alpha @ alpha.T) / params.load_mass
    wb = params.baumgarte_omega
    zb = params.baumgarte_zeta
    phi = 0.5 * (dist * dist - params.lengths * params.lengths)
    phidot = np.einsum("ij,ij->i", rel, vrel)
    b = (
        np.einsum("ij,ij->i", vrel, vrel)
        + np.einsum("ij,ij->i", rel, thrust_vectors) / params.masses
        + 2.0 * zb * wb * phidot
        + wb * wb * phi
    ) / dist
    w, vects = np.linalg.eigh(m)
    if w[0] <= 0.0 or w[-1] / w[0] > COND_LIMIT:
        raise TensionSolveError(
            f"tension system singular or ill-conditioned (eigenvalues {w.min():.3e}..{w.max():.3e})"
        )
    return vects @ ((b @ vects) / w)


def solve_tensions(
    state: SystemState, thrust_vectors: np.ndarray, params: SystemParams
) -> np.ndarray:
    """Cable tension magnitudes consistent with the rigid-cable constraints.

    Negative entries mean the rigid-cable model would need to push; callers
    flag those samples as slack-cable violations but the dynamics proceed
    with the computed values.
    """
    rel = state.x - state.x_load[None, :]
    dist = np.linalg.norm(rel, axis=1)
    if np.any(dist < 1e-6):
        raise DegenerateGeometryError("vehicle coincident with load; cable direction undefined")
    alpha = -rel / dist[:, None]
    vrel = state.v - state.v_load[None, :]
    return _solve_tensions(alpha, rel, dist, vrel, np.asarray(thrust_vectors, dtype=float), params)


@numba.njit(cache=True)
def _deriv_core(y, thrust, torque, masses, lengths, inertias, inertias_inv,
                load_mass, gravity, wb, zb, ceiling, n):
    """Derivative of the flat state vector; returns a status code, not exceptions."""
    dy = np.empty_like(y)
    tension = np.zeros(n)
    alpha = np.zeros((n, 3))
    thrust_vec = np.zeros((n, 3))
    residual = 0.0

    ox = 6
    ov = 6 + 3 * n
    oq = 6 + 6 * n
    ow = 6 + 10 * n

    # thrust vectors f_i R_i e3 (clamped f, normalized q)
    for i in range(n):
        f = thrust[i]
        if f < 0.0:
            f = 0.0
        if f > ceiling:
            f = ceiling
        q0 = y[oq + 4 * i]
        q1 = y[oq + 4 * i + 1]
        q2 = y[oq + 4 * i + 2]
        q3 = y[oq + 4 * i + 3]
        qn = np.sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3)
        q0 /= qn; q1 /= qn; q2 /= qn; q3 /= qn
        thrust_vec[i, 0] = f * 2.0 * (q1 * q3 + q0 * q2)
        thrust_vec[i, 1] = f * 2.0 * (q2 * q3 - q0 * q1)
        thrust_vec[i, 2] = f * (1.0 - 2.0 * (q1 * q1 + q2 * q2))

    # cable geometry and the tension system M T = b
    mmat = np.empty((n, n))
    b = np.empty(n)
    for i in range(n):
        rx = y[ox + 3 * i] - y[0]
        ry = y[ox + 3 * i + 1] - y[1]
        rz = y[ox + 3 * i + 2] - y[2]
        dist = np.sqrt(rx * rx + ry * ry + rz * rz)
        if dist < 1e-6:
            return _STATUS_DEGENERATE, dy, tension, alpha, thrust_vec, residual
        alpha[i, 0] = -rx / dist
        alpha[i, 1] = -ry / dist
        alpha[i, 2] = -rz / dist
        res = abs(dist - lengths[i])
        if res > residual:
            residual = res
        dvx = y[ov + 3 * i] - y[3]
        dvy = y[ov + 3 * i + 1] - y[4]
        dvz = y[ov + 3 * i + 2] - y[5]
        phi = 0.5 * (dist * dist - lengths[i] * lengths[i])
        phidot = rx * dvx + ry * dvy + rz * dvz
        ru = rx * thrust_vec[i, 0] + ry * thrust_vec[i, 1] + rz * thrust_vec[i, 2]
        b[i] = (
            dvx * dvx + dvy * dvy + dvz * dvz
            + ru / masses[i]
            + 2.0 * zb * wb * phidot
            + wb * wb * phi
        ) / dist
    for i in range(n):
        for j in range(n):
            dot = (alpha[i, 0] * alpha[j, 0] + alpha[i, 1] * alpha[j, 1]
                   + alpha[i, 2] * alpha[j, 2]) / load_mass
            if i == j:
                dot += 1.0 / masses[i]
            mmat[i, j] = dot
    w, vects = np.linalg.eigh(mmat)
    if w[0] <= 0.0 or w[n - 1] / w[0] > COND_LIMIT:
        return _STATUS_SINGULAR, dy, tension, alpha, thrust_vec, residual
    tension[:] = vects @ ((b @ vects) / w)

    # load acceleration
    sx = 0.0; sy = 0.0; sz = 0.0
    for i in range(n):
        sx += tension[i] * alpha[i, 0]
        sy += tension[i] * alpha[i, 1]
        sz += tension[i] * alpha[i, 2]
    dy[0] = y[3]; dy[1] = y[4]; dy[2] = y[5]
    dy[3] = -sx / load_mass
    dy[4] = -sy / load_mass
    dy[5] = -gravity - sz / load_mass

    for i in range(n):
        # translational
        dy[ox + 3 * i] = y[ov + 3 * i]
        dy[ox + 3 * i + 1] = y[ov + 3 * i + 1]
        dy[ox + 3 * i + 2] = y[ov + 3 * i + 2]
        mi = masses[i]
        dy[ov + 3 * i] = (thrust_vec[i, 0] + tension[i] * alpha[i, 0]) / mi
        dy[ov + 3 * i + 1] = (thrust_vec[i, 1] + tension[i] * alpha[i, 1]) / mi
        dy[ov + 3 * i + 2] = (thrust_vec[i, 2] + tension[i] * alpha[i, 2]) / mi - gravity
        # attitude kinematics dq = 1/2 q ⊗ [0, omega]
        q0 = y[oq + 4 * i]; q1 = y[oq + 4 * i + 1]
        q2 = y[oq + 4 * i + 2]; q3 = y[oq + 4 * i + 3]
        o1 = y[ow + 3 * i]; o2 = y[ow + 3 * i + 1]; o3 = y[ow + 3 * i + 2]
        dy[oq + 4 * i] = -0.5 * (q1 * o1 + q2 * o2 + q3 * o3)
        dy[oq + 4 * i + 1] = 0.5 * (q0 * o1 + q2 * o3 - q3 * o2)
        dy[oq + 4 * i + 2] = 0.5 * (q0 * o2 + q3 * o1 - q1 * o3)
        dy[oq + 4 * i + 3] = 0.5 * (q0 * o3 + q1 * o2 - q2 * o1)
        # rotational: J omega_dot = tau - omega x J omega
        jx = inertias[i, 0, 0] * o1 + inertias[i, 0, 1] * o2 + inertias[i, 0, 2] * o3
        jy = inertias[i, 1, 0] * o1 + inertias[i, 1, 1] * o2 + inertias[i, 1, 2] * o3
        jz = inertias[i, 2, 0] * o1 + inertias[i, 2, 1] * o2 + inertias[i, 2, 2] * o3
        gx = torque[i, 0] - (o2 * jz - o3 * jy)
        gy = torque[i, 1] - (o3 * jx - o1 * jz)
        gz = torque[i, 2] - (o1 * jy - o2 * jx)
        dy[ow + 3 * i] = inertias_inv[i, 0, 0] * gx + inertias_inv[i, 0, 1] * gy + inertias_inv[i, 0, 2] * gz
        dy[ow + 3 * i + 1] = inertias_inv[i, 1, 0] * gx + inertias_inv[i, 1, 1] * gy + inertias_inv[i, 1, 2] * gz
        dy[ow + 3 * i + 2] = inertias_inv[i, 2, 0] * gx + inertias_inv[i, 2, 1] * gy + inertias_inv[i, 2, 2] * gz
    return _STATUS_OK, dy, tension, alpha, thrust_vec, residual


@numba.njit(cache=True)
def _rk4_core(y0, thrust, torque, dt, masses, lengths, inertias, inertias_inv,
              load_mass, gravity, wb, zb, ceiling, n):
    s, k1, tension, alpha, thrust_vec, residual = _deriv_core(
        y0, thrust, torque, masses, lengths, inertias, inertias_inv,
        load_mass, gravity, wb, zb, ceiling, n)
    if s != _STATUS_OK:
        return s, y0, tension, alpha, thrust_vec, residual, 0.0
    s, k2, _, _, _, _ = _deriv_core(
        y0 + 0.5 * dt * k1, thrust, torque, masses, lengths, inertias, inertias_inv,
        load_mass, gravity, wb, zb, ceiling, n)
    if s != _STATUS_OK:
        return s, y0, tension, alpha, thrust_vec, residual, 0.0
    s, k3, _, _, _, _ = _deriv_core(
        y0 + 0.5 * dt * k2, thrust, torque, masses, lengths, inertias, inertias_inv,
        load_mass, gravity, wb, zb, ceiling, n)
    if s != _STATUS_OK:
        return s, y0, tension, alpha, thrust_vec, residual, 0.0
    s, k4, _, _, _, _ = _deriv_core(
        y0 + dt * k3, thrust, torque, masses, lengths, inertias, inertias_inv,
        load_mass, gravity, wb, zb, ceiling, n)
    if s != _STATUS_OK:
        return s, y0, tension, alpha, thrust_vec, residual, 0.0
    y = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    oq = 6 + 6 * n
    for i in range(n):
        q0 = y[oq + 4 * i]; q1 = y[oq + 4 * i + 1]
        q2 = y[oq + 4 * i + 2]; q3 = y[oq + 4 * i + 3]
        qn = np.sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3)
        y[oq + 4 * i] = q0 / qn
        y[oq + 4 * i + 1] = q1 / qn
        y[oq + 4 * i + 2] = q2 / qn
        y[oq + 4 * i + 3] = q3 / qn
    post = 0.0
    for i in range(n):
        rx = y[6 + 3 * i] - y[0]
        ry = y[6 + 3 * i + 1] - y[1]
        rz = y[6 + 3 * i + 2] - y[2]
        res = abs(np.sqrt(rx * rx + ry * ry + rz * rz) - lengths[i])
        if res > post:
            post = res
    return _STATUS_OK, y, tension, alpha, thrust_vec, residual, post


def _raise_for_status(status: int) -> None:
    if status == _STATUS_DEGENERATE:
        raise DegenerateGeometryError("vehicle coincident with load; cable direction undefined")
    if status == _STATUS_SINGULAR:
        raise TensionSolveError("tension system singular or ill-conditioned")


def system_derivative(state: SystemState, inputs: PlantInputs, params: SystemParams):
    """Full state derivative under the given plant inputs.

    Returns ``(derivative_state, info)`` where the derivative is packed in a
    SystemState-shaped container (positions hold velocities, etc.).
    """
    status, dy, tension, alpha, thrust_vec, residual = _deriv_core(
        state.to_vector(), np.asarray(inputs.thrust, dtype=float),
        np.asarray(inputs.torque, dtype=float), params.masses, params.lengths,
        params.inertias, params.inertias_inv, params.load_mass, params.gravity,
        params.baumgarte_omega, params.baumgarte_zeta, params._ceiling, params.n)
    _raise_for_status(status)
    info = DynamicsInfo(tension, alpha, thrust_vec, tension <= 0.0, float(residual))
    return SystemState.from_vector(dy, params.n, state.t), info


def rk4_step(state: SystemState, inputs: PlantInputs, dt: float, params: SystemParams):
    """Classical RK4 step with held inputs.

    Quaternions are renormalized after the step; the cable-length residual is
    checked against the divergence threshold.  Returns ``(new_state, info)``
    with diagnostics from the first stage (the sampled state).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    status, y, tension, alpha, thrust_vec, residual, post = _rk4_core(
        state.to_vector(), np.asarray(inputs.thrust, dtype=float),
        np.asarray(inputs.torque, dtype=float), float(dt), params.masses,
        params.lengths, params.inertias, params.inertias_inv, params.load_mass,
        params.gravity, params.baumgarte_omega, params.baumgarte_zeta,
        params._ceiling, params.n)
    _raise_for_status(status)
    if post > RESIDUAL_HARD:
        raise IntegrationDivergenceError(
            f"cable constraint residual {post:.3e} m exceeds {RESIDUAL_HARD:.0e} m at t={state.t + dt:.6f}"
        )
    new_state = SystemState.from_vector(y, params.n, state.t + dt)
    info = DynamicsInfo(tension, alpha, thrust_vec, tension <= 0.0, float(residual))
    return new_state, info
