"""Command-line front end.

Subcommands write a CSV (one row per frame/trial/SNR point) and a JSON
summary into ``--out-dir``.  Exit status: 0 success, 1 configuration error,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend
from .config import config_hash, config_from_dict, config_to_dict, parse_config
from .errors import ConfigError, UavLocError
from .harness import (
    ScenarioConfig,
    run_snr_sweep,
    run_trajectory_comparison,
    run_trial,
    trial_seed,
)
from .localization import estimate_emitter, toa_only_estimate
from .measurement import EmitterPosition, SignalParams, UavState, synthesize_frame
from .trajectory import TrajectoryInputs, VelocityBranch, solve_velocity, velocity_constraint

SCHEMA_VERSION = 1

TRACK_COLUMNS = [
    "trial", "frame", "x_hat", "y_hat", "accuracy_m", "estimator_branch", "lambda",
    "uav_x", "uav_y", "distance_m", "velocity_branch", "next_vx", "next_vy", "next_speed",
]
SWEEP_COLUMNS = ["snr_db", "method", "mean_accuracy_m", "std_accuracy_m", "trials", "failures"]
COMPARE_COLUMNS = ["frame", "arm", "mean_accuracy_m", "std_accuracy_m", "mean_distance_m", "trials"]


def fmt(value) -> str:
    """Locale-independent shortest round-trip text for CSV cells."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_summary(path: Path, config: ScenarioConfig, command: str, outputs, payload):
    manifest = {
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        "output_paths": [str(p) for p in outputs] + [str(path)],
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "backend": backend(),
        "manifest": manifest,
        "config": config_to_dict(config),
        "results": payload,
    }
    path.write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _svg(path: Path, emitter: EmitterPosition, tracks, estimates, manifest_name: str):
    """Plan view of UAV tracks (polylines) and per-frame estimates (dots)."""
    pts = [np.atleast_2d(t)[:, :2] for t in tracks] + [np.atleast_2d(e)[:, :2] for e in estimates]
    allp = np.vstack(pts + [emitter.xy[None, :]])
    allp = allp[np.all(np.isfinite(allp), axis=1)]
    lo, hi = allp.min(axis=0) - 5.0, allp.max(axis=0) + 5.0
    size = 480.0
    span = max(hi - lo)

    def tx(p):
        return (p[0] - lo[0]) / span * size, size - (p[1] - lo[1]) / span * size

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}">',
        f"<!-- manifest: {manifest_name} -->",
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>',
    ]
    for i, track in enumerate(tracks):
        coords = " ".join("%.2f,%.2f" % tx(p) for p in np.atleast_2d(track))
        out.append(f'<polyline points="{coords}" fill="none" stroke="{colors[i % 4]}" stroke-width="1.5"/>')
    for i, est in enumerate(estimates):
        for p in np.atleast_2d(est):
            if np.all(np.isfinite(p[:2])):
                x, y = tx(p)
                out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{colors[i % 4]}"/>')
    x, y = tx(emitter.xy)
    out.append(f'<path d="M{x - 6:.2f},{y:.2f} L{x + 6:.2f},{y:.2f} M{x:.2f},{y - 6:.2f} L{x:.2f},{y + 6:.2f}" stroke="black" stroke-width="2"/>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def _load_config(args) -> ScenarioConfig:
    config = parse_config(args.config) if args.config else config_from_dict({})
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.trials is not None:
        updates["num_trials"] = args.trials
    if args.frames is not None:
        updates["num_frames"] = args.frames
    if args.no_trajectory:
        updates["trajectory_enabled"] = False
    if args.snr_list:
        try:
            updates["snr_sweep"] = tuple(float(v) for v in args.snr_list.split(","))
        except ValueError:
            raise ConfigError("--snr-list", "expected comma-separated numbers") from None
    if not updates:
        return config
    merged = config_to_dict(config)
    merged.update(updates)
    if "snr_sweep" in updates:
        merged["snr_sweep"] = list(updates["snr_sweep"])
    return config_from_dict(merged)


def cmd_track(config: ScenarioConfig, out_dir: Path, svg: bool) -> int:
    rows = []
    results = []
    for i in range(config.num_trials):
        res = run_trial(config, trial_seed(config.seed, i))
        results.append(res)
        for f, (est, acc, flag, cmd, end, dist) in enumerate(
            zip(res.estimates, res.accuracy, res.flags, res.commands, res.frame_end_positions, res._emitter_dist),
            start=1,
        ):
            if cmd is None:
                vb, vx, vy, sp = "", math.nan, math.nan, math.nan
            else:
                vb, vx, vy, sp = cmd.branch.value, cmd.u[0], cmd.u[1], cmd.speed_used
            rows.append([i, f, est.r[0], est.r[1], acc, flag, est.lam, end[0], end[1], dist, vb, vx, vy, sp])
    csv_path = out_dir / "track.csv"
    write_csv(csv_path, TRACK_COLUMNS, rows)
    acc = np.array([r.accuracy for r in results])
    outputs = [csv_path]
    if svg:
        svg_path = out_dir / "track.svg"
        _svg(svg_path, config.emitter, [results[0].positions], [np.array([e.r for e in results[0].estimates])], "track_summary.json")
        outputs.append(svg_path)
    failures = sum(flag == "FAILED" for r in results for flag in r.flags)
    write_summary(
        out_dir / "track_summary.json",
        config,
        "track",
        outputs,
        {
            "mean_accuracy_m_per_frame": acc.mean(axis=0),
            "final_mean_accuracy_m": float(acc[:, -1].mean()),
            "failed_frames": failures,
        },
    )
    print(f"track: {config.num_trials} trials x {config.num_frames} frames, "
          f"final mean accuracy {acc[:, -1].mean():.4g} m -> {csv_path}")
    return 0


def cmd_snr_sweep(config: ScenarioConfig, out_dir: Path, svg: bool) -> int:
    rows = run_snr_sweep(config)
    csv_path = out_dir / "snr_sweep.csv"
    write_csv(
        csv_path,
        SWEEP_COLUMNS,
        [[r.snr_db, r.method, r.mean_accuracy_m, r.std_accuracy_m, r.trials, r.failures] for r in rows],
    )
    write_summary(
        out_dir / "snr_sweep_summary.json",
        config,
        "snr-sweep",
        [csv_path],
        {"points": [r.__dict__ for r in rows]},
    )
    for r in rows:
        print(f"snr {r.snr_db:6.1f} dB  {r.method:12s} mean {r.mean_accuracy_m:.4g} m")
    return 0


def cmd_trajectory_compare(config: ScenarioConfig, out_dir: Path, svg: bool) -> int:
    cmp = run_trajectory_comparison(config)
    rows = []
    for arm in ("optimized", "fixed"):
        mean = cmp.mean_accuracy(arm)
        std = cmp.std_accuracy(arm) if config.num_trials > 1 else np.full(config.num_frames, math.nan)
        dist = cmp.mean_distance(arm)
        for f in range(config.num_frames):
            rows.append([f + 1, arm, mean[f], std[f], dist[f], config.num_trials])
    csv_path = out_dir / "trajectory_compare.csv"
    write_csv(csv_path, COMPARE_COLUMNS, rows)
    outputs = [csv_path]
    if svg:
        svg_path = out_dir / "trajectory_compare.svg"
        _svg(
            svg_path,
            config.emitter,
            [cmp.optimized[0].positions, cmp.fixed[0].positions],
            [np.array([e.r for e in cmp.optimized[0].estimates]), np.array([e.r for e in cmp.fixed[0].estimates])],
            "trajectory_compare_summary.json",
        )
        outputs.append(svg_path)
    final = {arm: float(cmp.mean_accuracy(arm)[-1]) for arm in ("optimized", "fixed")}
    dist = {arm: cmp.mean_final_distance(arm) for arm in ("optimized", "fixed")}
    write_summary(
        out_dir / "trajectory_compare_summary.json",
        config,
        "trajectory-compare",
        outputs,
        {"final_mean_accuracy_m": final, "final_mean_distance_m": dist},
    )
    print(f"final-frame mean accuracy: optimized {final['optimized']:.4g} m, fixed {final['fixed']:.4g} m")
    print(f"final-frame UAV-emitter distance: optimized {dist['optimized']:.4g} m, fixed {dist['fixed']:.4g} m")
    return 0


def selftest_checks():
    """Zero-noise end-to-end checks; yields ``(name, passed, detail)``."""
    sig = SignalParams(f0=3e8, c=3e8, delta=0.05, K=10, sigma_w2=0.0, sigma_tau2=0.0)
    uav = UavState([0.0, 0.0, 50.0], [10.0, 0.0, 0.0])
    emitter = EmitterPosition(35.0, 15.0)
    frame = synthesize_frame(uav, emitter, sig, 0)

    est = estimate_emitter(frame, sig)
    err = float(np.linalg.norm(est.position - emitter.xy))
    if err > 1e-5 and est.ambiguous:
        err = float(np.linalg.norm(est.mirror[:2] - emitter.xy))
    yield "doppler_toa_zero_noise", err <= 1e-5, f"error {err:.3g} m"

    est = toa_only_estimate(frame, sig)
    err = min(
        float(np.linalg.norm(est.position - emitter.xy)),
        float(np.linalg.norm(est.mirror[:2] - emitter.xy)) if est.mirror is not None else math.inf,
    )
    yield "toa_only_zero_noise", err <= 1e-5, f"error {err:.3g} m"

    cfg = ScenarioConfig(signal=sig, num_frames=1, num_trials=1, trajectory_enabled=False)
    res = run_trial(cfg, trial_seed(0, 0))
    yield "run_trial_zero_noise", res.accuracy[0] <= 1e-5, f"accuracy {res.accuracy[0]:.3g} m"

    inputs = TrajectoryInputs([4.5, 0.0, 50.0], [35.0, 15.0], 3.0 + 0.05 * 25.0, 5.0, 30.0, 1.0, 0.05)
    cmd = solve_velocity(inputs)
    resid = abs(velocity_constraint(inputs, cmd.u))
    ok = cmd.branch is VelocityBranch.TWO_ROOT and resid < 1e-9 and abs(np.hypot(*cmd.u) - 5.0) < 1e-9
    yield "velocity_roots", ok, f"residual {resid:.3g}"


def cmd_selftest(config, out_dir, svg) -> int:
    failed = 0
    for name, ok, detail in selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
        failed += not ok
    return 2 if failed else 0


COMMANDS = {
    "track": cmd_track,
    "snr-sweep": cmd_snr_sweep,
    "trajectory-compare": cmd_trajectory_compare,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavloc", description="Single-UAV Doppler/ToA emitter localisation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (missing fields take defaults)")
    common.add_argument("--seed", type=int, help="root random seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--frames", type=int, help="frames per trial")
    common.add_argument("--no-trajectory", action="store_true", help="keep the initial velocity in every frame")
    common.add_argument("--snr-list", help="comma-separated SNR points in dB (snr-sweep)")
    common.add_argument("--out-dir", default="results", help="output directory (default: results)")
    common.add_argument("--svg", action="store_true", help="also write an SVG plan view")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    try:
        if args.command != "selftest":
            out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](config, out_dir, args.svg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (UavLocError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
