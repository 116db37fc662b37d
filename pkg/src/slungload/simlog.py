"""Time-series log of a closed-loop run, with a stable CSV schema.

One record per integrator step, sampled before the step: the state at t_k,
the reference at t_k and the commands/constraint forces computed there.
Values are written with 17 significant digits so re-runs are byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationDivergenceError, SlungloadError

_VEC = ("x", "y", "z")
_QUAT = ("w", "x", "y", "z")


def column_names(n: int) -> list[str]:
    """Stable column order: time, load block, then one block per vehicle."""
    cols = ["t"]
    for base in ("xL", "vL", "xLd", "vLd", "aLd", "xe"):
        cols += [f"{base}_{c}" for c in _VEC]
    for i in range(1, n + 1):
        for base, comps in (
            (f"x{i}", _VEC), (f"v{i}", _VEC), (f"q{i}", _QUAT), (f"om{i}", _VEC),
        ):
            cols += [f"{base}_{c}" for c in comps]
        cols += [f"f{i}"]
        cols += [f"tau{i}_{c}" for c in _VEC]
        cols += [f"T{i}"]
        cols += [f"alpha{i}_{c}" for c in _VEC]
        cols += [f"Tda{i}_{c}" for c in _VEC]
        cols += [f"x{i}d_{c}" for c in _VEC]
        cols += [f"q{i}d_{c}" for c in _QUAT]
        cols += [f"zeta{i}_{c}" for c in _VEC]
        cols += [f"zetaL{i}_{c}" for c in _VEC]
        cols += [f"slack{i}"]
    return cols


class SimLog:
    """Preallocated arrays for one run; see :func:`column_names` for the schema."""

    def __init__(self, n: int, steps: int):
        self.n = n
        self.steps = steps
        self.t = np.zeros(steps)
        z3 = lambda: np.zeros((steps, 3))
        self.x_load = z3()
        self.v_load = z3()
        self.ref_pos = z3()
        self.ref_vel = z3()
        self.ref_acc = z3()
        self.load_err = z3()
        zv = lambda k: np.zeros((steps, n, k))
        self.x = zv(3)
        self.v = zv(3)
        self.q = zv(4)
        self.omega = zv(3)
        self.thrust = np.zeros((steps, n))
        self.torque = zv(3)
        self.tension = np.zeros((steps, n))
        self.cable_dir = zv(3)
        self.tension_vec_des = zv(3)
        self.x_des = zv(3)
        self.q_des = zv(4)
        self.zeta = zv(3)
        self.zeta_load = zv(3)
        self.slack = np.zeros((steps, n), dtype=bool)

    def record(self, k, state, ref, commands, info, torque):
        self.t[k] = state.t
        self.x_load[k] = state.x_load
        self.v_load[k] = state.v_load
        self.ref_pos[k] = ref.position
        self.ref_vel[k] = ref.velocity
        self.ref_acc[k] = ref.acceleration
        self.load_err[k] = state.x_load - ref.position
        self.x[k] = state.x
        self.v[k] = state.v
        self.q[k] = state.q
        self.omega[k] = state.omega
        self.thrust[k] = commands.thrust  # f_i = f_id, commanded instantaneously
        self.torque[k] = torque
        self.tension[k] = info.tensions
        self.cable_dir[k] = info.cable_dirs
        self.tension_vec_des[k] = commands.tension_vec
        self.x_des[k] = commands.position
        self.q_des[k] = commands.attitude
        self.zeta[k] = info.thrust_vectors - commands.thrust_vec
        self.zeta_load[k] = info.tensions[:, None] * info.cable_dirs - commands.tension_vec
        self.slack[k] = info.slack
        # NaN/inf in the dynamics or commands propagates into these sums
        probe = (
            float(self.x_load[k].sum() + self.v_load[k].sum())
            + float(self.x[k].sum() + self.v[k].sum() + self.q[k].sum() + self.omega[k].sum())
            + float(self.thrust[k].sum() + self.torque[k].sum() + self.tension[k].sum())
            + float(self.tension_vec_des[k].sum() + self.zeta[k].sum())
        )
        if not np.isfinite(probe):
            raise IntegrationDivergenceError(f"non-finite value in log at step {k} (t={state.t:.6f})")

    def row(self, k) -> np.ndarray:
        parts = [
            np.atleast_1d(self.t[k]), self.x_load[k], self.v_load[k],
            self.ref_pos[k], self.ref_vel[k], self.ref_acc[k], self.load_err[k],
        ]
        for i in range(self.n):
            parts += [
                self.x[k, i], self.v[k, i], self.q[k, i], self.omega[k, i],
                np.atleast_1d(self.thrust[k, i]), self.torque[k, i],
                np.atleast_1d(self.tension[k, i]), self.cable_dir[k, i],
                self.tension_vec_des[k, i], self.x_des[k, i], self.q_des[k, i],
                self.zeta[k, i], self.zeta_load[k, i],
                np.atleast_1d(float(self.slack[k, i])),
            ]
        return np.concatenate(parts)

    def matrix(self) -> np.ndarray:
        return np.stack([self.row(k) for k in range(self.steps)])

    def to_csv(self, path, decimate: int = 1) -> None:
        if decimate < 1:
            raise ValueError("decimate must be >= 1")
        mat = self.matrix()[::decimate]
        header = ",".join(column_names(self.n))
        np.savetxt(path, mat, fmt="%.17g", delimiter=",", header=header, comments="")

    def to_dat(self, path, decimate: int = 1) -> None:
        """gnuplot-friendly whitespace-separated copy of the same columns."""
        mat = self.matrix()[::decimate]
        header = "# " + " ".join(column_names(self.n))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            np.savetxt(fh, mat, fmt="%.17g", delimiter=" ")

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
        found = header.split(",")
        # vehicle count from the trailing slack columns
        n = sum(1 for c in found if c.startswith("slack"))
        expected = column_names(n) if n >= 1 else ["t"]
        if n < 1 or found != expected:
            raise SlungloadError(
                f"log schema mismatch: expected {len(expected)} columns "
                f"({expected[:4]}...), found {len(found)} ({found[:4]}...)"
            )
        mat = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if mat.shape[1] != len(expected):
            raise SlungloadError(
                f"log has {mat.shape[1]} data columns but the header names {len(expected)}"
            )
        log = cls(n, mat.shape[0])
        j = 0

        def take(k):
            nonlocal j
            block = mat[:, j:j + k]
            j += k
            return block

        log.t = take(1)[:, 0]
        log.x_load = take(3)
        log.v_load = take(3)
        log.ref_pos = take(3)
        log.ref_vel = take(3)
        log.ref_acc = take(3)
        log.load_err = take(3)
        for i in range(n):
            log.x[:, i] = take(3)
            log.v[:, i] = take(3)
            log.q[:, i] = take(4)
            log.omega[:, i] = take(3)
            log.thrust[:, i] = take(1)[:, 0]
            log.torque[:, i] = take(3)
            log.tension[:, i] = take(1)[:, 0]
            log.cable_dir[:, i] = take(3)
            log.tension_vec_des[:, i] = take(3)
            log.x_des[:, i] = take(3)
            log.q_des[:, i] = take(4)
            log.zeta[:, i] = take(3)
            log.zeta_load[:, i] = take(3)
            log.slack[:, i] = take(1)[:, 0] != 0.0
        return log

    @property
    def dt(self) -> float:
        if self.steps < 2:
            raise SlungloadError("log too short to infer a sample spacing")
        return float(self.t[1] - self.t[0])
