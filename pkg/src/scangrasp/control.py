"""Semi-autonomous grasp control: lock, auto-preshape, user take-over, release.

The state machine is a pure table lookup; ``run_trial`` replays an aiming
trajectory frame by frame through simulation, reconstruction, feedback and
the state machine, with a scripted user issuing the gesture events.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np

from scangrasp.feedback import Directional, FeedbackState, Locked, feedback_step
from scangrasp.geometry import Cuboid, Cylinder, ShapeModel, Sphere
from scangrasp.reconstruct import ReconConfig, reconstruct
from scangrasp.scan_sim import Scene, SensorPose, ground_truth, simulate_scans

APERTURE_MARGIN = 15.0  # mm added to the grasp size
APERTURE_MAX = 100.0  # mm, widest hand opening
WRIST_TOLERANCE_DEG = 15.0


class ControlState(enum.Enum):
    IDLE = "Idle"
    LOCKED = "Locked"
    PRESHAPED = "Preshaped"
    DIRECT_CONTROL = "DirectControl"


class UserEvent(enum.Enum):
    LOCK_ACQUIRED = "LockAcquired"
    LOCK_LOST = "LockLost"
    TRIGGER_PRESHAPE = "TriggerPreshape"  # quick wrist flexion
    TAKE_OVER = "TakeOver"  # quick wrist extension
    OBJECT_RELEASED = "ObjectReleased"
    PROPORTIONAL_COMMAND = "ProportionalCommand"


@dataclass(frozen=True)
class ProportionalCommand:
    """Proportional open/close command; only meaningful under direct control."""

    value: float
    event = UserEvent.PROPORTIONAL_COMMAND

    def __post_init__(self):
        if not -1.0 <= self.value <= 1.0:
            raise ValueError("proportional command must lie in [-1, 1]")


S, E = ControlState, UserEvent
TRANSITIONS: dict[tuple[ControlState, UserEvent], ControlState] = {
    (S.IDLE, E.LOCK_ACQUIRED): S.LOCKED,
    (S.LOCKED, E.LOCK_LOST): S.IDLE,
    (S.LOCKED, E.TRIGGER_PRESHAPE): S.PRESHAPED,
    (S.PRESHAPED, E.LOCK_ACQUIRED): S.LOCKED,
    (S.PRESHAPED, E.TAKE_OVER): S.DIRECT_CONTROL,
    (S.DIRECT_CONTROL, E.PROPORTIONAL_COMMAND): S.DIRECT_CONTROL,
    (S.DIRECT_CONTROL, E.OBJECT_RELEASED): S.IDLE,
}
del S, E


def _event_kind(event) -> UserEvent:
    if isinstance(event, ProportionalCommand):
        return UserEvent.PROPORTIONAL_COMMAND
    return UserEvent(event)


def is_defined(state: ControlState, event) -> bool:
    return (state, _event_kind(event)) in TRANSITIONS


def transition(state: ControlState, event) -> ControlState:
    """Next state; pairs without an entry leave the state unchanged."""
    return TRANSITIONS.get((state, _event_kind(event)), state)


# --------------------------------------------------------------------------
# Model to hand configuration


@dataclass(frozen=True, eq=False)
class ProsthesisConfig:
    wrist_rotation: float  # degrees, counter-clockwise in the image from "up"
    aperture: float  # mm
    grasp_axis: np.ndarray
    too_large: bool = False


def axis_roll_deg(axis) -> float | None:
    """In-image angle of an axis, measured counter-clockwise from +y, folded to (-90, 90].

    None when the axis points (almost) along the optical axis.
    """
    ax, ay = float(axis[0]), float(axis[1])
    if math.hypot(ax, ay) < 1e-9:
        return None
    ang = math.degrees(math.atan2(-ax, ay))
    if ang <= -90.0:
        ang += 180.0
    elif ang > 90.0:
        ang -= 180.0
    return ang + 0.0  # no negative zero


def grasp_config(
    model: ShapeModel, margin: float = APERTURE_MARGIN, aperture_max: float = APERTURE_MAX
) -> ProsthesisConfig:
    """Wrist rotation and hand opening for a palmar grasp of ``model``.

    The hand opens across the grasp size and turns so that its opening is
    perpendicular to the object's long axis as seen by the camera.
    """
    if isinstance(model, Sphere):
        axis = np.array([0.0, 1.0, 0.0])
        wrist = 0.0
    elif isinstance(model, (Cylinder, Cuboid)):
        axis = np.asarray(model.principal_axis, dtype=float)
        roll = axis_roll_deg(axis)
        wrist = 0.0 if roll is None else roll
    else:
        raise TypeError(f"unsupported model {type(model).__name__}")
    wanted = model.grasp_size + margin
    return ProsthesisConfig(wrist, min(wanted, aperture_max), axis, wanted > aperture_max)


def wrist_error_deg(a: float, b: float) -> float:
    """Difference of two wrist angles modulo 180 degrees."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


# --------------------------------------------------------------------------
# Trials


@dataclass(frozen=True)
class TrialConfig:
    mode: str = "analytic"
    n_lines: int = 4
    seed: int = 0
    frame_rate_hz: float = 7.0
    max_frames: int = 60
    target: int = 0  # index of the object the user wants to grasp
    recon: ReconConfig = field(default_factory=ReconConfig)
    margin: float = APERTURE_MARGIN
    aperture_max: float = APERTURE_MAX
    wrist_tolerance_deg: float = WRIST_TOLERANCE_DEG


class AimPolicy(Protocol):
    def next_pose(self, frame: int, pose: SensorPose, feedback: FeedbackState) -> SensorPose | None: ...


@dataclass(frozen=True)
class PoseSequence:
    """Open-loop trajectory: a fixed list of sensor poses, one per frame."""

    poses: tuple[SensorPose, ...]

    def start(self) -> SensorPose:
        return self.poses[0]

    def next_pose(self, frame: int, pose: SensorPose, feedback: FeedbackState) -> SensorPose | None:
        return self.poses[frame + 1] if frame + 1 < len(self.poses) else None


@dataclass(frozen=True)
class GuidedApproach:
    """Closed-loop aiming: sweep from ``start`` towards a (possibly biased) aim
    point at constant speed, then follow the tactile cues.

    Positions are lateral sensor offsets (x, y) in mm in the world frame. The
    policy is a pure function of the frame index, pose and feedback.
    """

    start: tuple[float, float]
    aim: tuple[float, float]
    speed: float = 5.0  # mm per frame during the sweep
    correction_step: float = 5.0  # mm per frame when following the cues

    def start_pose(self) -> SensorPose:
        return SensorPose((float(self.start[0]), float(self.start[1]), 0.0))

    @property
    def sweep_frames(self) -> int:
        d = math.hypot(self.aim[0] - self.start[0], self.aim[1] - self.start[1])
        return max(1, math.ceil(d / self.speed))

    def next_pose(self, frame: int, pose: SensorPose, feedback: FeedbackState) -> SensorPose | None:
        n = self.sweep_frames
        if frame + 1 <= n:
            f = (frame + 1) / n
            x = self.start[0] + f * (self.aim[0] - self.start[0])
            y = self.start[1] + f * (self.aim[1] - self.start[1])
            return SensorPose((x, y, pose.position[2]), pose.rotvec_deg)
        x, y = pose.position[0], pose.position[1]
        if isinstance(feedback, Directional) and not feedback.holding:
            a = feedback.amplitudes  # up, right, down, left
            v = np.array([a[1] - a[3], a[0] - a[2]])
            norm = float(np.hypot(*v))
            if norm > 0:
                x += float(v[0] / norm * self.correction_step)
                y += float(v[1] / norm * self.correction_step)
        return SensorPose((x, y, pose.position[2]), pose.rotvec_deg)


@dataclass(frozen=True, eq=False)
class FrameRecord:
    frame: int
    t: float
    state: ControlState
    feedback: FeedbackState
    shape: str | None
    size_mm: float | None
    orientation_deg: float | None
    elapsed_ms: float
    events: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class TrialTrace:
    frames: tuple[FrameRecord, ...]
    verdict: str  # success | failure | timeout
    frames_to_lock: int | None
    config: ProsthesisConfig | None
    reason: str = ""

    CSV_FIELDS = (
        "t", "state", "feedback", "amp_up", "amp_right", "amp_down", "amp_left",
        "shape", "size_mm", "orientation_deg", "events", "elapsed_ms",
    )

    def to_csv(self, include_timing: bool = False) -> str:
        """One row per frame. Timing is left empty unless asked for, so that
        reruns with the same seeds produce identical text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for r in self.frames:
            amps = r.feedback.amplitudes
            w.writerow(
                [
                    repr(r.t), r.state.value, r.feedback.kind, *(repr(float(a)) for a in amps),
                    r.shape or "", "" if r.size_mm is None else repr(float(r.size_mm)),
                    "" if r.orientation_deg is None else repr(float(r.orientation_deg)),
                    "|".join(r.events), repr(r.elapsed_ms) if include_timing else "",
                ]
            )
        return buf.getvalue()


def frame_seed(seed: int, frame: int) -> int:
    return int(np.random.SeedSequence([seed, frame]).generate_state(1)[0])


def _model_orientation(model) -> float | None:
    if model is None or isinstance(model, Sphere):
        return None
    return axis_roll_deg(model.principal_axis)


def _verdict(scene: Scene, pose: SensorPose, cfg: TrialConfig, config: ProsthesisConfig) -> tuple[str, str]:
    gt = ground_truth(scene.objects[cfg.target], pose, scene.tilt_deg)
    if config.too_large:
        return "failure", "object too large for the hand"
    if config.aperture < gt.grasp_size:
        return "failure", "aperture smaller than the object"
    if gt.principal_axis is not None:
        true_roll = axis_roll_deg(gt.principal_axis)
        if true_roll is not None and wrist_error_deg(config.wrist_rotation, true_roll) > cfg.wrist_tolerance_deg:
            return "failure", "wrist misaligned"
    return "success", ""


def run_trial(scene: Scene, trajectory, cfg: TrialConfig = TrialConfig()) -> TrialTrace:
    """Replay an aiming trajectory through the whole pipeline.

    The scripted user triggers the preshape on the first locked frame after
    the lock was acquired, then takes over and releases the object, which
    ends the trial. A trajectory that never leads to a preshape times out.
    """
    pose = trajectory.start_pose() if hasattr(trajectory, "start_pose") else trajectory.start()
    state = ControlState.IDLE
    frames: list[FrameRecord] = []
    frames_to_lock = None
    config = None
    for k in range(cfg.max_frames):
        fseed = frame_seed(cfg.seed, k)
        scans = simulate_scans(scene.with_pose(pose), cfg.mode, cfg.n_lines, seed=fseed)
        rcfg = replace(cfg.recon, sac=replace(cfg.recon.sac, rng_seed=fseed))
        report = reconstruct(scans, rcfg)
        fb = feedback_step(scans, report.ok)
        events: list[UserEvent] = []
        locked = isinstance(fb, Locked)
        if locked and state is ControlState.IDLE:
            events.append(UserEvent.LOCK_ACQUIRED)
        elif state is ControlState.LOCKED and not locked:
            events.append(UserEvent.LOCK_LOST)
        elif state is ControlState.LOCKED and locked:
            events.append(UserEvent.TRIGGER_PRESHAPE)
        done = False
        for ev in events:
            new = transition(state, ev)
            if ev is UserEvent.LOCK_ACQUIRED and frames_to_lock is None:
                frames_to_lock = k
            if ev is UserEvent.TRIGGER_PRESHAPE and new is ControlState.PRESHAPED:
                config = grasp_config(report.model, cfg.margin, cfg.aperture_max)
                # the user is satisfied with the preshape and grasps
                events += [UserEvent.TAKE_OVER]
            if ev is UserEvent.TAKE_OVER and new is ControlState.DIRECT_CONTROL:
                events += [UserEvent.OBJECT_RELEASED]
            if ev is UserEvent.OBJECT_RELEASED:
                done = True
            state = new
        frames.append(
            FrameRecord(
                k, k / cfg.frame_rate_hz, state, fb, report.shape,
                report.model.grasp_size if report.ok else None,
                _model_orientation(report.model), report.elapsed_ms,
                tuple(e.value for e in events),
            )
        )
        if done:
            verdict, reason = _verdict(scene, pose, cfg, config)
            return TrialTrace(tuple(frames), verdict, frames_to_lock, config, reason)
        nxt = trajectory.next_pose(k, pose, fb)
        if nxt is None:
            break
        pose = nxt
    return TrialTrace(tuple(frames), "timeout", frames_to_lock, config, "no preshape before the trajectory ended")
