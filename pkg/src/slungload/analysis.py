"""Error-state LTI model, attractive-ellipsoid certificate and empirical checks.

The closed-loop translational error dynamics are linear in the stacked state
chi = [int(xe), xe, d(xe)/dt, int(xe1), xe1, d(xe1)/dt, ...] driven by the
disturbance stack zeta = [zeta_L1, zeta_1, alpha_dd_1d, ...].  A quadratic
certificate (P, alpha, eps) with

    W_L = [[P A~ + A~^T P + alpha P,  P B~],
           [B~^T P,                  -eps I]] <= 0

bounds all trajectories into the ellipsoid chi^T P chi <= beta / alpha with
beta = eps * sum of the squared disturbance bounds.

No semidefinite-programming dependency: the search constructs P per decay
rate from a Lyapunov equation and grids over the disturbance multiplier,
which is sufficient because only one feasible triple has to be exhibited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .controller import ControllerGains
from .dynamics import SystemParams
from .errors import CertificateError, SlungloadError
from .simlog import SimLog

FEASIBILITY_TOL = 1e-9


@dataclass
class ErrorStateMatrices:
    """A~ (block-diagonal) and B~ (disturbance input) of the error dynamics."""

    a: np.ndarray            # (9(n+1), 9(n+1))
    b: np.ndarray            # (9(n+1), 9n)
    n: int


@dataclass
class DisturbanceBounds:
    """Per-vehicle bounds on ||zeta_i||^2, ||alpha_dd_id||^2, ||zeta_Li||^2."""

    thrust_err: np.ndarray       # c_1i
    alpha_accel: np.ndarray      # c_2i
    tension_err: np.ndarray      # c_3i

    def __post_init__(self):
        for name in ("thrust_err", "alpha_accel", "tension_err"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v < 0):
                raise ValueError(f"{name} bounds must be non-negative")
            setattr(self, name, v)

    def total(self) -> float:
        return float(self.thrust_err.sum() + self.alpha_accel.sum() + self.tension_err.sum())

    @classmethod
    def unit(cls, n: int) -> "DisturbanceBounds":
        return cls(np.ones(n), np.ones(n), np.ones(n))


@dataclass
class EllipsoidCertificate:
    """Feasible (P, alpha, eps) plus the derived ellipsoid level beta/alpha."""

    p: np.ndarray
    alpha: float
    eps: float
    beta: float
    lmax: float                  # lambda_max(W_L) at the returned point
    trace_metric: float          # tr((beta/alpha) P^-1)

    @property
    def radius_sq(self) -> float:
        return self.beta / self.alpha

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "eps": self.eps,
            "beta": self.beta,
            "radius_sq": self.radius_sq,
            "lambda_max_WL": self.lmax,
            "trace_metric": self.trace_metric,
            "p": self.p.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EllipsoidCertificate":
        return cls(
            p=np.asarray(doc["p"], dtype=float),
            alpha=float(doc["alpha"]),
            eps=float(doc["eps"]),
            beta=float(doc["beta"]),
            lmax=float(doc["lambda_max_WL"]),
            trace_metric=float(doc["trace_metric"]),
        )


def _companion_block(ki: np.ndarray, kp: np.ndarray, kd: np.ndarray, mass: float) -> np.ndarray:
    """A + (1/m) K for one body: a triple-integrator chain with PID feedback."""
    blk = np.zeros((9, 9))
    blk[0:3, 3:6] = np.eye(3)
    blk[3:6, 6:9] = np.eye(3)
    blk[6:9, 0:3] = -np.diag(ki) / mass
    blk[6:9, 3:6] = -np.diag(kp) / mass
    blk[6:9, 6:9] = -np.diag(kd) / mass
    return blk


def build_error_matrices(params: SystemParams, gains: ControllerGains) -> ErrorStateMatrices:
    """Assemble A~ and B~ with the exact block layout of the error dynamics."""
    n = params.n
    dim = 9 * (n + 1)
    a = np.zeros((dim, dim))
    a[0:9, 0:9] = _companion_block(gains.ki_load, gains.kp_load, gains.kd_load, params.load_mass)
    for i in range(n):
        r = 9 * (i + 1)
        a[r:r + 9, r:r + 9] = _companion_block(
            gains.ki_veh, gains.kp_veh, gains.kd_veh, params.masses[i]
        )

    # zeta stacks (zeta_Li, zeta_i, alpha_dd_id) per vehicle, 3 columns each
    bcol = np.zeros((9, 3))
    bcol[6:9] = np.eye(3)
    b = np.zeros((dim, 9 * n))
    for i in range(n):
        c = 9 * i
        b[0:9, c:c + 3] = bcol / params.load_mass                     # load row: zeta_Li
        r = 9 * (i + 1)
        b[r:r + 9, c:c + 3] = bcol / params.masses[i]                 # zeta_Li
        b[r:r + 9, c + 3:c + 6] = bcol / params.masses[i]             # zeta_i
        b[r:r + 9, c + 6:c + 9] = bcol * params.lengths[i]            # alpha_dd_id
    return ErrorStateMatrices(a, b, n)


def build_WL(mats: ErrorStateMatrices, p: np.ndarray, alpha: float, eps: float) -> np.ndarray:
    """The certificate matrix; symmetric by construction."""
    if alpha < 0 or eps <= 0:
        raise ValueError("alpha must be >= 0 and eps > 0")
    a, b = mats.a, mats.b
    top_left = p @ a + a.T @ p + alpha * p
    top_left = 0.5 * (top_left + top_left.T)
    dim_z = b.shape[1]
    return np.block([[top_left, p @ b], [(p @ b).T, -eps * np.eye(dim_z)]])


def check_feasibility(w_l: np.ndarray, tol: float = FEASIBILITY_TOL):
    """(feasible, lambda_max): feasible iff the largest eigenvalue is <= tol."""
    if not np.allclose(w_l, w_l.T, atol=1e-9):
        raise ValueError("W_L must be symmetric")
    lmax = float(scipy.linalg.eigvalsh(w_l, subset_by_index=(w_l.shape[0] - 1, w_l.shape[0] - 1))[0])
    return lmax <= tol, lmax


def hurwitz_margin(a: np.ndarray) -> float:
    """Largest eigenvalue real part (negative for a Hurwitz matrix)."""
    return float(np.max(np.real(np.linalg.eigvals(a))))


@dataclass
class CertificateSearchConfig:
    alpha_range: tuple = (1e-3, 10.0)
    alpha_points: int = 40
    eps_range: tuple = (1e-2, 1e3)
    eps_points: int = 25
    extend_eps: bool = True     # include the exact Schur-complement boundary as a candidate

    def __post_init__(self):
        if self.alpha_range[0] <= 0 or self.eps_range[0] <= 0:
            raise ValueError("search ranges must be positive")


def search_certificate(
    mats: ErrorStateMatrices,
    bounds: DisturbanceBounds,
    config: CertificateSearchConfig | None = None,
) -> EllipsoidCertificate:
    """Find (P, alpha, eps) with lambda_max(W_L) <= 0 minimizing tr((beta/alpha) P^-1).

    Per candidate alpha, P solves (A~ + alpha/2 I)^T P + P (A~ + alpha/2 I) = -I,
    which makes the (1,1) block of W_L equal -I exactly; feasibility then only
    depends on eps, which is scanned on a log grid (optionally extended to the
    exact Schur-complement boundary sigma_max(B~^T P)^2).  Candidate alphas are
    log-spaced below the Hurwitz margin of A~ (larger values cannot admit any P),
    which plays the role of bisecting downward from infeasible rates.
    """
    config = config or CertificateSearchConfig()
    margin = hurwitz_margin(mats.a)
    if margin >= 0:
        raise CertificateError(
            f"gains do not stabilize nominal error dynamics (max Re eig = {margin:.3e})"
        )
    total = bounds.total()
    alpha_lo, alpha_hi = config.alpha_range
    alpha_cap = min(alpha_hi, 2.0 * (-margin) * (1.0 - 1e-9))
    if alpha_cap <= alpha_lo:
        alpha_cap = alpha_lo * 1.0000001
    alphas = np.geomspace(alpha_lo, alpha_cap, config.alpha_points)
    eps_grid = list(np.geomspace(config.eps_range[0], config.eps_range[1], config.eps_points))

    dim = mats.a.shape[0]
    best = None
    best_lmax = np.inf
    for alpha in alphas:
        a_eff = mats.a + 0.5 * alpha * np.eye(dim)
        if hurwitz_margin(a_eff) >= 0:
            continue
        p = scipy.linalg.solve_continuous_lyapunov(a_eff.T, -np.eye(dim))
        p = 0.5 * (p + p.T)
        if np.min(scipy.linalg.eigvalsh(p)) <= 0:
            continue
        candidates = list(eps_grid)
        if config.extend_eps:
            # exact feasibility boundary of the Schur complement, padded
            # slightly; the metric grows with eps so this candidate is the
            # best possible for the current alpha
            eps_star = float(np.linalg.norm(mats.b.T @ p, 2) ** 2) * (1.0 + 1e-9)
            candidates = sorted(candidates + [eps_star])
        trace_pinv = float(np.trace(np.linalg.inv(p)))
        for eps in candidates:
            w_l = build_WL(mats, p, alpha, eps)
            feasible, lmax = check_feasibility(w_l)
            if lmax < best_lmax:
                best_lmax = lmax
            if not feasible:
                continue
            beta = eps * total
            metric = (beta / alpha) * trace_pinv
            key = (metric, eps, alpha)
            if best is None or key < best[0]:
                best = (key, EllipsoidCertificate(p, float(alpha), float(eps), beta, lmax, metric))
            break  # the metric grows with eps; the first feasible eps is the best for this alpha
    if best is None:
        raise CertificateError(
            f"no feasible certificate on the search grid (best lambda_max = {best_lmax:.3e})"
        )
    return best[1]


def _central_second_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Second time derivative of a (k, ...) series; one-sided copies at the ends."""
    out = np.zeros_like(series)
    if series.shape[0] < 3:
        return out
    out[1:-1] = (series[2:] - 2.0 * series[1:-1] + series[:-2]) / (dt * dt)
    out[0] = out[1]
    out[-1] = out[-2]
    return out


def estimate_disturbance_bounds(log: SimLog, transient_cutoff: float = 0.0) -> DisturbanceBounds:
    """Empirical c bounds: max squared norms over t >= cutoff.

    alpha_dd_id comes from central finite differences of the logged desired
    cable directions.
    """
    mask = log.t >= transient_cutoff
    if not np.any(mask):
        raise SlungloadError(
            f"log ends at t={log.t[-1]:.3f} s, before the cutoff {transient_cutoff:.3f} s"
        )
    alpha_d = log.tension_vec_des / np.maximum(
        np.linalg.norm(log.tension_vec_des, axis=2, keepdims=True), 1e-12
    )
    alpha_dd = _central_second_derivative(alpha_d, log.dt)
    c1 = np.max(np.einsum("kij,kij->ki", log.zeta, log.zeta)[mask], axis=0)
    c2 = np.max(np.einsum("kij,kij->ki", alpha_dd, alpha_dd)[mask], axis=0)
    c3 = np.max(np.einsum("kij,kij->ki", log.zeta_load, log.zeta_load)[mask], axis=0)
    return DisturbanceBounds(c1, c2, c3)


def build_chi_series(log: SimLog) -> np.ndarray:
    """Error-state vectors chi(t_k) for every log sample, shape (k, 9(n+1)).

    Integrals accumulate trapezoidally from t = 0, matching the controller's
    own accumulators; vehicle error velocities come from central differences
    of the logged desired positions.
    """
    k, n = log.steps, log.n
    dt = log.dt

    def trapezoid(series):
        out = np.zeros_like(series)
        out[1:] = np.cumsum(0.5 * dt * (series[1:] + series[:-1]), axis=0)
        return out

    chi = np.zeros((k, 9 * (n + 1)))
    chi[:, 0:3] = trapezoid(log.load_err)
    chi[:, 3:6] = log.load_err
    chi[:, 6:9] = log.v_load - log.ref_vel
    for i in range(n):
        e = log.x[:, i] - log.x_des[:, i]
        xd_dot = np.gradient(log.x_des[:, i], dt, axis=0)
        c = 9 * (i + 1)
        chi[:, c:c + 3] = trapezoid(e)
        chi[:, c + 3:c + 6] = e
        chi[:, c + 6:c + 9] = log.v[:, i] - xd_dot
    return chi


def build_chi(log: SimLog, index: int) -> np.ndarray:
    """chi at one sample (ordering: load triple, then vehicle triples)."""
    return build_chi_series(log)[index]


def ellipsoid_membership(chi: np.ndarray, cert: EllipsoidCertificate):
    """(inside, level) with level = chi^T P chi / (beta/alpha); inside iff <= 1."""
    chi = np.asarray(chi, dtype=float)
    if chi.shape[0] != cert.p.shape[0]:
        raise SlungloadError(
            f"chi has dimension {chi.shape[0]} but the certificate expects {cert.p.shape[0]}"
        )
    level = float(chi @ cert.p @ chi) / cert.radius_sq
    return level <= 1.0, level


def containment_levels(chis: np.ndarray, cert: EllipsoidCertificate) -> np.ndarray:
    """Ellipsoid levels for a (k, dim) series of error states."""
    if chis.shape[1] != cert.p.shape[0]:
        raise SlungloadError(
            f"chi series has dimension {chis.shape[1]} but the certificate expects {cert.p.shape[0]}"
        )
    return np.einsum("ki,ij,kj->k", chis, cert.p, chis) / cert.radius_sq


def lyapunov_violation_rate(
    chis: np.ndarray, cert: EllipsoidCertificate, dt: float, tol: float = 1e-6
) -> float:
    """Fraction of steps violating V(t+dt) - V(t) <= (-alpha V + beta) dt + tol.

    tol absorbs the discretization of the continuous-time inequality.
    """
    v = np.einsum("ki,ij,kj->k", chis, cert.p, chis)
    dv = v[1:] - v[:-1]
    bound = (-cert.alpha * v[:-1] + cert.beta) * dt + tol
    return float(np.mean(dv > bound))
