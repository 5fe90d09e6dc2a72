"""Command line entry point: ``scangrasp {recon,trial,sweep}``.

Every option can also be set through an environment variable named
``SCANGRASP_<OPTION>`` (dashes become underscores, e.g. ``SCANGRASP_N_LINES``).
Command-line flags win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from scangrasp.control import GuidedApproach, TrialConfig, run_trial
from scangrasp.errors import ScanGraspError
from scangrasp.harness import ExperimentSpec, SpecValidationError, run_experiment
from scangrasp.reconstruct import ReconConfig, reconstruct
from scangrasp.sac import SacConfig
from scangrasp.scan_sim import Scene, SceneFileError, load_scene, protocol_scene, simulate_scans

ENV_PREFIX = "SCANGRASP_"


def _env(name: str, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"error: {ENV_PREFIX}{name.upper().replace('-', '_')}={raw!r} is not a valid value")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-lines", type=int, choices=(1, 2, 4), default=_env("n-lines", 4, int))
    p.add_argument("--noise-sigma", type=float, default=_env("noise-sigma", None, float),
                   help="override the scene's noise level (mm)")
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--mode", choices=("analytic", "cloud"), default=_env("mode", "analytic"))
    p.add_argument("--out", default=_env("out", None), help="output directory (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=_env("format", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scangrasp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recon", help="reconstruct the object in one scene")
    p.add_argument("--scene", default=_env("scene", None), help="scene JSON file")
    p.add_argument("--protocol", type=int, default=_env("protocol", None, int),
                   help="use protocol object N instead of a scene file")
    _common(p)

    p = sub.add_parser("trial", help="run one aiming and grasping trial")
    p.add_argument("--scene", default=_env("scene", None))
    p.add_argument("--protocol", type=int, default=_env("protocol", None, int))
    p.add_argument("--start", type=float, nargs=2, default=(-60.0, 0.0), metavar=("X", "Y"),
                   help="start offset of the sensor from the target, mm")
    p.add_argument("--bias", type=float, nargs=2, default=(0.0, 0.0), metavar=("X", "Y"),
                   help="aiming bias relative to the target, mm")
    p.add_argument("--max-frames", type=int, default=_env("max-frames", 60, int))
    p.add_argument("--timing", action="store_true", help="include per-frame timing in the CSV")
    _common(p)

    p = sub.add_parser("sweep", help="run a seeded batch and report metrics")
    p.add_argument("--scene", action="append", default=None,
                   help="scene file (repeatable); default is the protocol set")
    p.add_argument("--reps", type=int, default=_env("reps", 1, int))
    p.add_argument("--sigmas", type=float, nargs="+", default=None, help="noise levels (mm)")
    p.add_argument("--run-mode", choices=("recon", "trial"), default=_env("run-mode", "recon"))
    p.add_argument("--timing", action="store_true", help="include timing in the outputs")
    _common(p)
    return parser


def _load(args) -> Scene:
    if args.scene and args.protocol is not None:
        raise SystemExit("error: give either --scene or --protocol, not both")
    if args.scene:
        scene = load_scene(args.scene)
    elif args.protocol is not None:
        scene = protocol_scene(args.protocol)
    else:
        raise SystemExit("error: a scene is required (--scene FILE or --protocol N)")
    if args.noise_sigma is not None:
        scene = Scene(scene.objects, scene.sensor_pose, args.noise_sigma, scene.rng_seed, scene.tilt_deg)
    return scene


def _emit(text: str, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def _model_dict(model) -> dict:
    d = {"shape": model.kind, "grasp_size_mm": float(model.grasp_size)}
    for k, v in model.__dict__.items():
        if k == "kind":
            continue
        d[k] = v.tolist() if hasattr(v, "tolist") else float(v)
    return d


def cmd_recon(args) -> int:
    scene = _load(args)
    scans = simulate_scans(scene, args.mode, args.n_lines, seed=args.seed)
    report = reconstruct(scans, ReconConfig(sac=SacConfig(rng_seed=args.seed)))
    if report.ok:
        out = {"ok": True, **_model_dict(report.model), "confidence": report.shape_confidence}
    else:
        out = {"ok": False, "reason": report.reason, "message": report.message}
    out["labels"] = [d.label for d in report.diagnostics]
    out["points_per_scan"] = [len(s) for s in scans]
    if args.format == "json":
        _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out, "recon.json")
    else:
        keys = sorted(out)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        w.writerow([json.dumps(out[k]) if isinstance(out[k], (list, dict)) else out[k] for k in keys])
        _emit(buf.getvalue(), args.out, "recon.csv")
    return 0


def cmd_trial(args) -> int:
    scene = _load(args)
    x, y, _ = scene.objects[0].position
    traj = GuidedApproach((x + args.start[0], y + args.start[1]), (x + args.bias[0], y + args.bias[1]))
    cfg = TrialConfig(mode=args.mode, n_lines=args.n_lines, seed=args.seed, max_frames=args.max_frames)
    trace = run_trial(scene, traj, cfg)
    if args.format == "csv":
        _emit(trace.to_csv(include_timing=args.timing), args.out, "trace.csv")
    else:
        summary = {
            "verdict": trace.verdict,
            "reason": trace.reason,
            "frames": len(trace.frames),
            "frames_to_lock": trace.frames_to_lock,
            "states": [f.state.value for f in trace.frames],
        }
        if trace.config is not None:
            summary["wrist_rotation_deg"] = trace.config.wrist_rotation
            summary["aperture_mm"] = trace.config.aperture
            summary["too_large"] = trace.config.too_large
        _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.out, "trial.json")
    return 0


def cmd_sweep(args) -> int:
    sigmas = tuple(args.sigmas) if args.sigmas else ((args.noise_sigma,) if args.noise_sigma is not None else (0.0,))
    spec = ExperimentSpec(
        scene_files=tuple(args.scene or ()),
        noise_sigmas=sigmas,
        repetitions=args.reps,
        seed=args.seed,
        mode=args.mode,
        n_lines=args.n_lines,
        run_mode=args.run_mode,
    )
    if args.out is not None:
        result = run_experiment(spec, args.out, include_timing=args.timing)
        sys.stdout.write(result.report.to_json(args.timing) + "\n")
        return 0
    result = run_experiment(spec, include_timing=args.timing)
    if args.format == "csv":
        sys.stdout.write(result.csv(args.timing))
    else:
        sys.stdout.write(result.report.to_json(args.timing) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return {"recon": cmd_recon, "trial": cmd_trial, "sweep": cmd_sweep}[args.command](args)
    except SceneFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SpecValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ScanGraspError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
