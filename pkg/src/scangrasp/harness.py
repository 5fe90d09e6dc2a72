"""Batch experiments: seeded reconstruction sweeps, trajectory suites and metric reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from scangrasp.control import (
    GuidedApproach,
    PoseSequence,
    TrialConfig,
    TrialTrace,
    run_trial,
)
from scangrasp.geometry import SCAN_SUBSETS, axis_angle_deg
from scangrasp.reconstruct import ReconConfig, reconstruct
from scangrasp.sac import SacConfig
from scangrasp.scan_sim import (
    PROTOCOL_OBJECTS,
    SHAPES,
    Scene,
    SceneObject,
    SensorPose,
    ground_truth,
    load_scene,
    protocol_scene,
    scene_to_dict,
    simulate_scans,
)

MODES = ("analytic", "cloud")
RUN_MODES = ("recon", "trial")
TRANSPORT_SECONDS = 3.0  # fixed reach-grasp-transport time added to the aiming time


class SpecValidationError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = tuple(problems)
        super().__init__("invalid experiment: " + "; ".join(self.problems))


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run. With no scene files the ten-object protocol set is used."""

    scene_files: tuple[str, ...] = ()
    protocol_indices: tuple[int, ...] = tuple(range(len(PROTOCOL_OBJECTS)))
    noise_sigmas: tuple[float, ...] = (0.0,)
    repetitions: int = 1
    seed: int = 0
    mode: str = "analytic"
    n_lines: int = 4
    run_mode: str = "recon"
    tilt_deg: float | None = None

    def validate(self) -> None:
        problems = []
        if self.repetitions < 1:
            problems.append("repetitions must be >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            problems.append("seed must be a non-negative integer")
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}")
        if self.n_lines not in SCAN_SUBSETS:
            problems.append(f"n_lines must be one of {sorted(SCAN_SUBSETS)}")
        if self.run_mode not in RUN_MODES:
            problems.append(f"run_mode must be one of {RUN_MODES}")
        if not self.noise_sigmas or any(s < 0 for s in self.noise_sigmas):
            problems.append("noise_sigmas must be non-empty and >= 0")
        if not self.scene_files and any(not 0 <= i < len(PROTOCOL_OBJECTS) for i in self.protocol_indices):
            problems.append(f"protocol_indices must lie in [0, {len(PROTOCOL_OBJECTS) - 1}]")
        if not self.scene_files and not self.protocol_indices:
            problems.append("no scenes: give scene_files or protocol_indices")
        if problems:
            raise SpecValidationError(problems)

    def spec_hash(self) -> str:
        text = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def trial_seed(base: int, *keys: int) -> int:
    """Independent per-trial seed; depends only on the base seed and the trial's own keys."""
    return int(np.random.SeedSequence([base, *keys]).generate_state(1)[0])


def _scenes(spec: ExperimentSpec) -> list[tuple[str, Scene]]:
    if spec.scene_files:
        return [(str(p), load_scene(p)) for p in spec.scene_files]
    out = []
    for i in spec.protocol_indices:
        sc = protocol_scene(i) if spec.tilt_deg is None else protocol_scene(i, tilt_deg=spec.tilt_deg)
        out.append((f"protocol-{i}", sc))
    return out


# --------------------------------------------------------------------------
# Per-trial rows


ROW_FIELDS = (
    "trial", "scene", "rep", "noise_sigma", "seed", "mode", "n_lines",
    "true_shape", "pred_shape", "correct", "true_size_mm", "size_error_mm",
    "orientation_error_deg", "failure_cause",
)
TIMING_FIELD = "elapsed_ms"


def failure_cause(report, correct: bool) -> str:
    """First matching cause: capture-volume truncation, then fit failure, then ambiguity."""
    if correct:
        return ""
    diags = getattr(report, "diagnostics", ())
    if any(d.touches_boundary for d in diags):
        return "truncation"
    if not report.ok:
        if report.reason in ("fit-failure", "no-principal-direction", "degenerate"):
            return "fit-failure"
        if report.reason == "ambiguous":
            return "ambiguous"
        return report.reason
    return "misclassified"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def evaluate_recon(scene: Scene, mode: str, n_lines: int, seed: int) -> tuple[dict, float]:
    """Reconstruct one frame and score it against the scene's first object."""
    scans = simulate_scans(scene, mode, n_lines, seed=seed)
    report = reconstruct(scans, ReconConfig(sac=SacConfig(rng_seed=seed)))
    gt = ground_truth(scene.objects[0], scene.sensor_pose, scene.tilt_deg)
    correct = bool(report.ok and report.shape == gt.shape)
    size_err = ori_err = None
    if correct:
        size_err = abs(float(report.model.grasp_size) - float(gt.grasp_size))
        if gt.principal_axis is not None:
            ori_err = axis_angle_deg(report.model.principal_axis, gt.principal_axis)
    row = {
        "true_shape": gt.shape,
        "pred_shape": report.shape or "",
        "correct": correct,
        "true_size_mm": float(gt.grasp_size),
        "size_error_mm": size_err,
        "orientation_error_deg": ori_err,
        "failure_cause": failure_cause(report, correct),
    }
    return row, report.elapsed_ms


@dataclass(frozen=True)
class TrialRow:
    values: dict
    elapsed_ms: float


def run_rows(spec: ExperimentSpec) -> list[TrialRow]:
    """Every (scene, noise level, repetition) trial of ``spec``, in a fixed order."""
    spec.validate()
    rows = []
    k = 0
    for si, (name, base) in enumerate(_scenes(spec)):
        for ni, sigma in enumerate(spec.noise_sigmas):
            for rep in range(spec.repetitions):
                seed = trial_seed(spec.seed, si, ni, rep)
                scene = Scene(base.objects, base.sensor_pose, float(sigma), seed, base.tilt_deg)
                if spec.run_mode == "recon":
                    vals, ms = evaluate_recon(scene, spec.mode, spec.n_lines, seed)
                else:
                    vals, ms = _evaluate_trial(scene, spec, seed)
                vals = {
                    "trial": k, "scene": name, "rep": rep, "noise_sigma": float(sigma), "seed": seed,
                    "mode": spec.mode, "n_lines": spec.n_lines, **vals,
                }
                rows.append(TrialRow(vals, ms))
                k += 1
    return rows


def _evaluate_trial(scene: Scene, spec: ExperimentSpec, seed: int) -> tuple[dict, float]:
    """Full aiming trial from 60 mm to the side of the target."""
    target = np.asarray(scene.objects[0].position, dtype=float)
    traj = GuidedApproach((target[0] - 60.0, target[1]), (target[0], target[1]))
    trace = run_trial(scene, traj, TrialConfig(mode=spec.mode, n_lines=spec.n_lines, seed=seed))
    gt = ground_truth(scene.objects[0], scene.sensor_pose, scene.tilt_deg)
    last = trace.frames[-1]
    correct = trace.verdict == "success"
    return {
        "true_shape": gt.shape,
        "pred_shape": last.shape or "",
        "correct": correct,
        "true_size_mm": float(gt.grasp_size),
        "size_error_mm": None if last.size_mm is None else abs(last.size_mm - gt.grasp_size),
        "orientation_error_deg": None,
        "failure_cause": "" if correct else trace.verdict,
    }, float(sum(f.elapsed_ms for f in trace.frames))


def rows_to_csv(rows: Iterable[TrialRow], include_timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fields = ROW_FIELDS + ((TIMING_FIELD,) if include_timing else ())
    w.writerow(fields)
    for r in rows:
        vals = [_fmt(r.values[f]) for f in ROW_FIELDS]
        if include_timing:
            vals.append(repr(r.elapsed_ms))
        w.writerow(vals)
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    """Parse per-trial rows back into typed dicts; '#' comment lines are skipped."""
    out = []
    lines = [ln for ln in text.splitlines(keepends=True) if not ln.startswith("#")]
    for rec in csv.DictReader(lines):
        out.append(
            {
                **rec,
                "trial": int(rec["trial"]),
                "rep": int(rec["rep"]),
                "noise_sigma": float(rec["noise_sigma"]),
                "seed": int(rec["seed"]),
                "n_lines": int(rec["n_lines"]),
                "correct": rec["correct"] == "1",
                "true_size_mm": float(rec["true_size_mm"]),
                "size_error_mm": float(rec["size_error_mm"]) if rec["size_error_mm"] else None,
                "orientation_error_deg": float(rec["orientation_error_deg"]) if rec["orientation_error_deg"] else None,
            }
        )
    return out


# --------------------------------------------------------------------------
# Aggregation


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate of per-trial rows. Errors are averaged over correct reconstructions only."""

    n_trials: int
    success_rate: dict[str, float]  # percent, per true shape
    attempts: dict[str, int]
    size_mae_mm: float | None
    size_mae_pct: float | None
    orientation_mae_deg: float | None
    failure_causes: dict[str, int]
    spec_hash: str = ""
    elapsed_ms: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("elapsed_ms")
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)


def _mean(xs: list[float]) -> float | None:
    return math.fsum(xs) / len(xs) if xs else None


def aggregate(rows: Sequence[dict], spec_hash: str = "", elapsed: Sequence[float] = ()) -> MetricsReport:
    """Fold rows into a report. Exact sums make the result independent of row order."""
    attempts: dict[str, int] = {}
    hits: dict[str, int] = {}
    size, size_pct, ori = [], [], []
    causes: dict[str, int] = {}
    for r in rows:
        shape = r["true_shape"]
        attempts[shape] = attempts.get(shape, 0) + 1
        if r["correct"]:
            hits[shape] = hits.get(shape, 0) + 1
            if r["size_error_mm"] is not None:
                size.append(r["size_error_mm"])
                size_pct.append(100.0 * r["size_error_mm"] / r["true_size_mm"])
            if r["orientation_error_deg"] is not None:
                ori.append(r["orientation_error_deg"])
        elif r["failure_cause"]:
            causes[r["failure_cause"]] = causes.get(r["failure_cause"], 0) + 1
    rate = {s: 100.0 * hits.get(s, 0) / n for s, n in sorted(attempts.items())}
    timing = {}
    if len(elapsed):
        e = np.asarray(elapsed, dtype=float)
        timing = {
            "mean": float(e.mean()),
            "p50": float(np.percentile(e, 50)),
            "p90": float(np.percentile(e, 90)),
            "max": float(e.max()),
        }
    return MetricsReport(
        len(rows), rate, dict(sorted(attempts.items())), _mean(size), _mean(size_pct), _mean(ori),
        dict(sorted(causes.items())), spec_hash, timing,
    )


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[TrialRow, ...]
    report: MetricsReport

    def csv(self, include_timing: bool = False) -> str:
        return rows_to_csv(self.rows, include_timing)


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None, include_timing: bool = False) -> ExperimentResult:
    """Run every trial of ``spec`` and aggregate; optionally write trials.csv and report.json."""
    rows = run_rows(spec)
    h = spec.spec_hash()
    report = aggregate([r.values for r in rows], h, [r.elapsed_ms for r in rows])
    result = ExperimentResult(tuple(rows), report)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "trials.csv").write_text(f"# spec_sha256={h}\n" + result.csv(include_timing))
        (out / "report.json").write_text(report.to_json(include_timing) + "\n")
    return result


# --------------------------------------------------------------------------
# Aiming trajectories


def overshoot_scenario() -> tuple[Scene, PoseSequence]:
    """Three frames of aiming at a 50 mm sphere: far to the right of it, then
    overshooting to its other side, then on target."""
    target = SceneObject("sphere", (50.0,), "upright", (0.0, 0.0, 200.0))
    scene = Scene((target,))
    poses = (
        SensorPose((-65.0, 0.0, 0.0)),  # object appears 65 mm to the right
        SensorPose((40.0, 0.0, 0.0)),  # overshoot: object 40 mm to the left
        SensorPose((0.0, 0.0, 0.0)),  # corrected: the optical axis pierces it
    )
    return scene, PoseSequence(poses)


def biased_approach(scene: Scene, bias_mm: float, start_offset: float = 80.0, speed: float = 5.0) -> GuidedApproach:
    """Sweep in from the left towards the target, aiming ``bias_mm`` above its centre."""
    x, y, _ = scene.objects[0].position
    return GuidedApproach((x - start_offset, y + bias_mm), (x, y + bias_mm), speed=speed)


@dataclass(frozen=True)
class TrajectorySummary:
    n: int
    success_rate: float
    timeout_rate: float
    frames_to_lock: tuple[int | None, ...]
    completion_s: tuple[float | None, ...]
    completion_percentiles: dict[str, float]


def run_trajectory_suite(
    scene: Scene,
    trajectories: Sequence,
    cfg: TrialConfig = TrialConfig(),
    transport_s: float = TRANSPORT_SECONDS,
) -> tuple[list[TrialTrace], TrajectorySummary]:
    """Run each trajectory as a trial and summarise lock times and verdicts.

    The simulated completion time is the aiming time up to the preshape plus
    a fixed transport constant.
    """
    traces = []
    for i, traj in enumerate(trajectories):
        traces.append(run_trial(scene, traj, TrialConfig(**{**cfg.__dict__, "seed": trial_seed(cfg.seed, i)})))
    ftl = tuple(t.frames_to_lock for t in traces)
    comp = tuple(
        None if t.verdict == "timeout" else len(t.frames) / cfg.frame_rate_hz + transport_s for t in traces
    )
    done = [c for c in comp if c is not None]
    pct = {}
    if done:
        pct = {f"p{q}": float(np.percentile(done, q)) for q in (10, 50, 90)}
    n = len(traces)
    return traces, TrajectorySummary(
        n,
        100.0 * sum(t.verdict == "success" for t in traces) / n if n else 0.0,
        100.0 * sum(t.verdict == "timeout" for t in traces) / n if n else 0.0,
        ftl,
        comp,
        pct,
    )


def scene_digest(scene: Scene) -> str:
    return hashlib.sha256(json.dumps(scene_to_dict(scene), sort_keys=True).encode()).hexdigest()


__all__ = [
    "ExperimentResult",
    "ExperimentSpec",
    "MetricsReport",
    "SHAPES",
    "SpecValidationError",
    "TrajectorySummary",
    "aggregate",
    "biased_approach",
    "evaluate_recon",
    "failure_cause",
    "overshoot_scenario",
    "rows_from_csv",
    "rows_to_csv",
    "run_experiment",
    "run_rows",
    "run_trajectory_suite",
    "scene_digest",
    "trial_seed",
]
