"""Command-line front end: run simulations, certify stability, analyze logs.

Exit codes: 0 success, 1 usage/config error, 2 analysis infeasible,
3 dynamics divergence.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .errors import (
    CertificateError,
    ConfigError,
    IntegrationDivergenceError,
    SlungloadError,
)
from .quat import quat_to_rot_batch
from .scenario import ScenarioConfig, build_scenario, config_from_file, load_config
from .simlog import SimLog
from .simulate import run_simulation
from .svgplot import Series, line_plot, xy_plot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_DIVERGED = 3

_AXES = ("x", "y", "z")


def _check_seed_env() -> None:
    seed = os.environ.get("SLUNGLOAD_SEED")
    if seed is None:
        return
    try:
        int(seed)
    except ValueError:
        raise ConfigError(
            f"SLUNGLOAD_SEED must be an integer if set (got {seed!r}); "
            "it is reserved and currently unused"
        ) from None


def _load_cfg(path: str | None) -> ScenarioConfig:
    if path is None:
        return load_config({})
    return config_from_file(path)


def _summary(result, cfg: ScenarioConfig, duration: float, dt: float) -> dict:
    log = result.log
    err = np.linalg.norm(log.load_err, axis=1)
    post = log.t >= min(5.0, 0.25 * duration)
    bounds = analysis.estimate_disturbance_bounds(log, 0.0)
    return {
        "config": cfg.to_dict(),
        "rows": int(log.steps),
        "dt": dt,
        "duration": duration,
        "runtime_seconds": result.runtime,
        "final_load_error_m": float(err[-1]),
        "max_load_error_m": float(err.max()),
        "post_transient_max_error_m": float(err[post].max()) if post.any() else None,
        "max_constraint_residual_m": result.max_constraint_residual,
        "slack_cable_samples": int(log.slack.any(axis=1).sum()),
        "disturbance_bounds": {
            "thrust_err": bounds.thrust_err.tolist(),
            "alpha_accel": bounds.alpha_accel.tolist(),
            "tension_err": bounds.tension_err.tolist(),
        },
    }


def _desired_thrust_vectors(log: SimLog, i: int) -> np.ndarray:
    rot = quat_to_rot_batch(log.q_des[:, i])
    return log.thrust[:, i][:, None] * rot[:, :, 2]


def write_plots(log: SimLog, out: Path) -> list[str]:
    """The reference figure set, rendered from the log alone."""
    t = log.t
    written = []

    def emit(name, *args, **kwargs):
        line_plot(out / name, *args, **kwargs)
        written.append(name)

    emit(
        "load_position.svg", t,
        [Series(f"xL_{a}", log.x_load[:, j]) for j, a in enumerate(_AXES)]
        + [Series(f"xLd_{a}", log.ref_pos[:, j], dashed=True) for j, a in enumerate(_AXES)],
        title="Load position vs reference", xlabel="t (s)", ylabel="position (m)",
    )
    emit(
        "load_error.svg", t,
        [Series(f"xe_{a}", log.load_err[:, j]) for j, a in enumerate(_AXES)],
        title="Load transportation error", xlabel="t (s)", ylabel="error (m)",
    )
    emit(
        "uav_positions.svg", t,
        [Series(f"x{i + 1}_{a}", log.x[:, i, j]) for i in range(log.n) for j, a in enumerate(_AXES)],
        title="Vehicle positions", xlabel="t (s)", ylabel="position (m)", size=(880, 380),
    )
    for i in range(log.n):
        emit(
            f"attitude_{i + 1}.svg", t,
            [Series(f"q{i + 1}_{c}", log.q[:, i, j]) for j, c in enumerate("wxyz")],
            title=f"Vehicle {i + 1} attitude quaternion", xlabel="t (s)", ylabel="component",
        )
    for j, a in enumerate(_AXES):
        emit(
            f"tensions_{a}.svg", t,
            [Series(f"T{i + 1}a_{a}", log.tension[:, i] * log.cable_dir[:, i, j]) for i in range(log.n)]
            + [Series(f"T{i + 1}a_{a} des", log.tension_vec_des[:, i, j], dashed=True) for i in range(log.n)],
            title=f"Cable tension vectors, {a} axis (solid actual, dashed desired)",
            xlabel="t (s)", ylabel="tension (N)", size=(880, 380),
        )
    resultant = np.linalg.norm(
        (log.tension[:, :, None] * log.cable_dir).sum(axis=1), axis=1
    )
    resultant_des = np.linalg.norm(log.tension_vec_des.sum(axis=1), axis=1)
    emit(
        "tension_resultant.svg", t,
        [Series("actual", resultant), Series("desired", resultant_des, dashed=True)],
        title="Resultant tension magnitude", xlabel="t (s)", ylabel="force (N)",
    )
    for i in range(log.n):
        u = _desired_thrust_vectors(log, i)
        emit(
            f"control_input_{i + 1}.svg", t,
            [Series(f"u{i + 1}_{a}", u[:, j]) for j, a in enumerate(_AXES)],
            title=f"Vehicle {i + 1} control input", xlabel="t (s)", ylabel="force (N)",
        )
    curves = [("load", log.x_load[:, 0], log.x_load[:, 1]), ("ref", log.ref_pos[:, 0], log.ref_pos[:, 1])]
    curves += [(f"uav {i + 1}", log.x[:, i, 0], log.x[:, i, 1]) for i in range(log.n)]
    xy_plot(out / "trajectory_top.svg", curves, title="Top view (x-y)")
    written.append("trajectory_top.svg")

    az, el = np.deg2rad(-55.0), np.deg2rad(28.0)

    def project(p):
        u = -p[:, 0] * np.sin(az) + p[:, 1] * np.cos(az)
        v = -(p[:, 0] * np.cos(az) + p[:, 1] * np.sin(az)) * np.sin(el) + p[:, 2] * np.cos(el)
        return u, v

    curves3 = [("load", *project(log.x_load)), ("ref", *project(log.ref_pos))]
    curves3 += [(f"uav {i + 1}", *project(log.x[:, i])) for i in range(log.n)]
    xy_plot(
        out / "trajectory_3d.svg", curves3,
        title="3D view (orthographic projection)", xlabel="view u (m)", ylabel="view v (m)",
    )
    written.append("trajectory_3d.svg")
    return written


def _run_one(config_path: str | None, out_dir: str, duration, dt, plots: bool, decimate: int) -> int:
    cfg = _load_cfg(config_path)
    scenario = build_scenario(cfg)
    result = run_simulation(scenario, duration=duration, dt=dt)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.log.to_csv(out / "log.csv", decimate=decimate)
    eff_duration = duration if duration is not None else cfg.duration
    eff_dt = dt if dt is not None else cfg.dt
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_summary(result, cfg, eff_duration, eff_dt), fh, indent=2)
    if plots:
        result.log.to_dat(out / "log.dat", decimate=decimate)
        write_plots(result.log, out)
    print(
        f"simulated {eff_duration:g} s in {result.runtime:.2f} s wall; "
        f"final load error {np.linalg.norm(result.log.load_err[-1]):.4g} m; wrote {out}/log.csv"
    )
    return EXIT_OK


def _batch_worker(args):
    config_path, out_dir = args
    return _run_one(config_path, out_dir, None, None, False, 1)


def cmd_simulate(args) -> int:
    if args.batch:
        configs = sorted(Path(args.batch).glob("*.json"))
        if not configs:
            raise ConfigError(f"no *.json configs found in {args.batch}")
        jobs = [(str(c), str(Path(args.out) / c.stem)) for c in configs]
        with concurrent.futures.ProcessPoolExecutor() as pool:
            list(pool.map(_batch_worker, jobs))
        return EXIT_OK
    return _run_one(args.config, args.out, args.duration, args.dt, args.plots, args.decimate)


def cmd_certify(args) -> int:
    cfg = _load_cfg(args.config)
    scenario = build_scenario(cfg)
    mats = analysis.build_error_matrices(scenario.params, scenario.gains)
    if args.log:
        log = SimLog.from_csv(args.log)
        bounds = analysis.estimate_disturbance_bounds(log, args.cutoff)
    else:
        log = None
        bounds = analysis.DisturbanceBounds.unit(scenario.params.n)

    report = {
        "gains": {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in cfg.gains.items()},
        "n": scenario.params.n,
        "state_dimension": mats.a.shape[0],
        "hurwitz_margin": analysis.hurwitz_margin(mats.a),
        "disturbance_bounds": {
            "thrust_err": bounds.thrust_err.tolist(),
            "alpha_accel": bounds.alpha_accel.tolist(),
            "tension_err": bounds.tension_err.tolist(),
        },
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    try:
        cert = analysis.search_certificate(mats, bounds)
    except CertificateError as exc:
        report["feasible"] = False
        report["error"] = str(exc)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
        print(f"certificate search failed: {exc}")
        return EXIT_USAGE if "Hurwitz" in str(exc) or "stabilize" in str(exc) else EXIT_INFEASIBLE

    report["feasible"] = True
    report["certificate"] = cert.to_dict()
    if log is not None:
        chis = analysis.build_chi_series(log)
        levels = analysis.containment_levels(chis, cert)
        mask = log.t >= args.cutoff
        report["containment_percent"] = float(100.0 * np.mean(levels[mask] <= 1.0))
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(
        f"feasible: alpha={cert.alpha:.4g} eps={cert.eps:.4g} beta={cert.beta:.4g} "
        f"lambda_max={cert.lmax:.3e} radius^2={cert.radius_sq:.4g}; wrote {out}"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    log = SimLog.from_csv(args.log)
    with open(args.cert, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not doc.get("feasible", False) or "certificate" not in doc:
        raise SlungloadError(f"{args.cert} does not hold a feasible certificate")
    cert = analysis.EllipsoidCertificate.from_dict(doc["certificate"])

    bounds = analysis.estimate_disturbance_bounds(log, args.cutoff)
    chis = analysis.build_chi_series(log)
    levels = analysis.containment_levels(chis, cert)
    mask = log.t >= args.cutoff
    containment = float(100.0 * np.mean(levels[mask] <= 1.0))
    violation = analysis.lyapunov_violation_rate(chis[mask], cert, log.dt)

    stride = max(1, log.steps // 2000)
    report = {
        "cutoff_s": args.cutoff,
        "containment_percent": containment,
        "lyapunov_violation_rate": violation,
        "disturbance_bounds": {
            "thrust_err": bounds.thrust_err.tolist(),
            "alpha_accel": bounds.alpha_accel.tolist(),
            "tension_err": bounds.tension_err.tolist(),
        },
        "levels": [[float(a), float(b)] for a, b in zip(log.t[::stride], levels[::stride])],
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
    print(
        f"containment {containment:.2f}% of samples (t >= {args.cutoff:g} s); "
        f"Lyapunov-decrease violation rate {violation:.4f}; wrote {out}"
    )
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slungload",
        description="Multi-UAV slung-load transport: simulation, stability certificate, log analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a closed-loop simulation")
    p.add_argument("--config", help="JSON scenario config (defaults reproduce the reference run)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--duration", type=float, help="override run duration (s)")
    p.add_argument("--dt", type=float, help="override integrator step (s)")
    p.add_argument("--plots", action="store_true", help="emit SVG figures and log.dat")
    p.add_argument("--decimate", type=int, default=1, help="keep every k-th log row")
    p.add_argument("--batch", help="run every *.json config in this directory concurrently")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="search an attractive-ellipsoid certificate")
    p.add_argument("--config", help="JSON scenario config")
    p.add_argument("--log", help="prior run log for disturbance-bound estimation")
    p.add_argument("--cutoff", type=float, default=0.0, help="transient cutoff for bounds (s)")
    p.add_argument("--out", default="certificate.json", help="report path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("analyze", help="containment/decrease analysis of a log against a certificate")
    p.add_argument("--log", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--cutoff", type=float, default=5.0, help="transient cutoff (s)")
    p.add_argument("--out", default="analysis.json", help="report path")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        _check_seed_env()
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationDivergenceError as exc:
        print(f"dynamics divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except SlungloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
