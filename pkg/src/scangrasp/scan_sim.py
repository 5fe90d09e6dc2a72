"""Synthetic scenes and laser-scan simulation.

Two modes produce scan lines:

* analytic -- rays are cast inside each laser plane, giving exact samples of
  the visible intersection curves;
* cloud -- a pinhole depth camera is emulated over the whole frustum, the
  cloud is cut to the capture volume and points within 1 mm of each laser
  plane are extracted.

Everything is expressed in the sensor frame once the scene's sensor pose has
been applied.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from scangrasp.geometry import ScanPlane, scan_planes, unit

CAPTURE_XY = (-50.0, 50.0)
CAPTURE_Z = (150.0, 250.0)
SCAN_TOLERANCE = 1.0  # mm, max distance of a cloud point from its laser plane
ARC_SPACING = 0.45  # mm, along the surface; gives > 100 points per scan on a 35 mm cylinder
DEPTH_RESOLUTION = (424, 240)
# Emulation constants only; they roughly match a small active stereo camera.
DEPTH_FOV_DEG = (87.0, 58.0)
DEFAULT_TILT_DEG = 30.0

SHAPES = ("sphere", "cylinder", "cuboid")
ORIENTATIONS = ("upright", "laying", "tilted_left", "tilted_right")


class SceneFileError(OSError):
    """A scene file could not be read or parsed."""


# --------------------------------------------------------------------------
# Solids in the sensor frame and ray casting from the sensor origin


@dataclass(frozen=True, eq=False)
class SphereSolid:
    center: np.ndarray
    radius: float

    def hits(self, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Distance to the first hit along each unit ray (inf on a miss) and the surface id."""
        c = self.center
        b = dirs @ c
        disc = b * b - (c @ c - self.radius**2)
        t = np.full(len(dirs), np.inf)
        ok = disc >= 0
        t_hit = b[ok] - np.sqrt(disc[ok])
        t[ok] = np.where(t_hit > 0, t_hit, np.inf)
        return t, np.zeros(len(dirs), dtype=int)


@dataclass(frozen=True, eq=False)
class CylinderSolid:
    center: np.ndarray
    axis: np.ndarray
    radius: float
    length: float

    def hits(self, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Surface ids: 0 mantle, 1 and 2 the end caps."""
        a = self.axis
        half = self.length / 2.0
        w = -self.center  # ray origin (sensor) relative to the center
        da = dirs @ a
        wa = w @ a
        d_perp = dirs - np.outer(da, a)
        w_perp = w - wa * a
        A = np.einsum("ij,ij->i", d_perp, d_perp)
        B = d_perp @ w_perp
        C = w_perp @ w_perp - self.radius**2
        disc = B * B - A * C
        ok = (disc >= 0) & (A > 1e-15)
        t_side = np.full(len(dirs), np.inf)
        t_side[ok] = (-B[ok] - np.sqrt(disc[ok])) / A[ok]
        with np.errstate(invalid="ignore"):
            s = t_side * da + wa
        side_ok = ok & (t_side > 0) & (np.abs(s) <= half)
        t = np.where(side_ok, t_side, np.inf)
        surf = np.zeros(len(dirs), dtype=int)
        for cap, sign in ((1, -1.0), (2, 1.0)):
            p0 = self.center + sign * half * a
            with np.errstate(divide="ignore", invalid="ignore"):
                tc = (p0 @ a) / da
                hit = tc[:, None] * dirs - p0
            inside = np.einsum("ij,ij->i", hit, hit) <= self.radius**2
            cap_ok = np.isfinite(tc) & (tc > 0) & inside & (tc < t)
            t = np.where(cap_ok, tc, t)
            surf = np.where(cap_ok, cap, surf)
        return t, surf


@dataclass(frozen=True, eq=False)
class BoxSolid:
    center: np.ndarray
    rotation: np.ndarray  # columns are the box axes
    half_sizes: np.ndarray

    def hits(self, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Slab test; surface id 2*axis + (0 for the negative face, 1 for the positive)."""
        o = -self.rotation.T @ self.center
        d = dirs @ self.rotation
        h = self.half_sizes
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-h - o) / d
            t2 = (h - o) / d
        near = np.minimum(t1, t2)
        near = np.where(np.isnan(near), -np.inf, near)
        far = np.maximum(t1, t2)
        far = np.where(np.isnan(far), np.inf, far)
        axis = np.argmax(near, axis=1)
        tmin = near[np.arange(len(dirs)), axis]
        tmax = far.min(axis=1)
        hit = (tmax >= tmin) & (tmin > 0)
        positive = (t2[np.arange(len(dirs)), axis] <= t1[np.arange(len(dirs)), axis]).astype(int)
        return np.where(hit, tmin, np.inf), 2 * axis + positive


def cast_rays(solids: Sequence, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First hit along each unit ray from the sensor origin.

    Returns the distance (inf on a miss) and a surface label that is unique
    per (object, surface) pair and -1 on a miss.
    """
    t = np.full(len(dirs), np.inf)
    label = np.full(len(dirs), -1)
    for k, solid in enumerate(solids):
        tk, sk = solid.hits(dirs)
        closer = tk < t
        t = np.where(closer, tk, t)
        label = np.where(closer, 8 * k + sk, label)
    return t, label


# --------------------------------------------------------------------------
# Scene description


@dataclass(frozen=True)
class SensorPose:
    """World-from-sensor rigid transform; rotation given as a rotation vector in degrees."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotvec_deg: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def rotation(self) -> np.ndarray:
        return Rotation.from_rotvec(np.radians(self.rotvec_deg)).as_matrix()

    def to_sensor(self, p) -> np.ndarray:
        return (np.asarray(p, dtype=float) - np.asarray(self.position)) @ self.rotation

    def direction_to_sensor(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.rotation

    def moved(self, dx: float = 0.0, dy: float = 0.0, dz: float = 0.0) -> "SensorPose":
        x, y, z = self.position
        return replace(self, position=(x + dx, y + dy, z + dz))


@dataclass(frozen=True)
class SceneObject:
    """One target object in world coordinates.

    ``size_mm`` is [diameter] for a sphere, [diameter, length] for a cylinder
    and [length, width, depth] for a cuboid, where length runs along the
    orientation axis and depth faces the sensor.
    """

    shape: str
    size_mm: tuple[float, ...]
    orientation: str | tuple[float, float, float] = "upright"
    position: tuple[float, float, float] = (0.0, 0.0, 200.0)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        need = {"sphere": 1, "cylinder": 2, "cuboid": 3}[self.shape]
        if len(self.size_mm) != need or any(s <= 0 for s in self.size_mm):
            raise ValueError(f"{self.shape} needs {need} positive sizes, got {self.size_mm}")
        if isinstance(self.orientation, str):
            if self.orientation not in ORIENTATIONS:
                raise ValueError(f"orientation must be one of {ORIENTATIONS} or an axis vector")
        elif len(self.orientation) != 3:
            raise ValueError("explicit orientation must be a 3-vector")

    def axis_world(self, tilt_deg: float = DEFAULT_TILT_DEG) -> np.ndarray:
        o = self.orientation
        if not isinstance(o, str):
            return unit(o)
        t = math.radians(tilt_deg)
        return {
            "upright": np.array([0.0, 1.0, 0.0]),
            "laying": np.array([1.0, 0.0, 0.0]),
            "tilted_left": np.array([-math.sin(t), math.cos(t), 0.0]),
            "tilted_right": np.array([math.sin(t), math.cos(t), 0.0]),
        }[o]

    def frame_world(self, tilt_deg: float = DEFAULT_TILT_DEG) -> np.ndarray:
        """Columns: length axis, width axis, depth axis (the one closest to +z)."""
        e1 = self.axis_world(tilt_deg)
        z = np.array([0.0, 0.0, 1.0])
        e3 = z - np.dot(z, e1) * e1
        if np.linalg.norm(e3) < 1e-9:
            e3 = np.array([0.0, 1.0, 0.0]) - e1[1] * e1
        e3 = unit(e3)
        e2 = np.cross(e3, e1)
        return np.column_stack([e1, e2, e3])

    def solid(self, pose: SensorPose, tilt_deg: float = DEFAULT_TILT_DEG):
        c = pose.to_sensor(self.position)
        if self.shape == "sphere":
            return SphereSolid(c, self.size_mm[0] / 2.0)
        if self.shape == "cylinder":
            axis = pose.direction_to_sensor(self.axis_world(tilt_deg))
            return CylinderSolid(c, axis, self.size_mm[0] / 2.0, self.size_mm[1])
        R = pose.rotation.T @ self.frame_world(tilt_deg)
        return BoxSolid(c, R, np.asarray(self.size_mm, dtype=float) / 2.0)

    def bounding_radius(self) -> float:
        return 0.5 * math.sqrt(sum(s * s for s in self.size_mm)) if self.shape != "sphere" else self.size_mm[0] / 2


@dataclass(frozen=True)
class GroundTruth:
    """What a correct reconstruction should report, in the sensor frame."""

    shape: str
    grasp_size: float
    principal_axis: np.ndarray | None
    center: np.ndarray


def ground_truth(obj: SceneObject, pose: SensorPose, tilt_deg: float = DEFAULT_TILT_DEG) -> GroundTruth:
    center = pose.to_sensor(obj.position)
    if obj.shape == "sphere":
        return GroundTruth("sphere", obj.size_mm[0], None, center)
    if obj.shape == "cylinder":
        axis = pose.direction_to_sensor(obj.axis_world(tilt_deg))
        return GroundTruth("cylinder", obj.size_mm[0], axis, center)
    R = pose.rotation.T @ obj.frame_world(tilt_deg)
    # the face seen by the sensor is the one whose normal is closest to the optical axis
    facing = int(np.argmax(np.abs(R[2])))
    face_axes = [i for i in range(3) if i != facing]
    dims = [obj.size_mm[i] for i in face_axes]
    long_i = face_axes[int(np.argmax(dims))]
    return GroundTruth("cuboid", min(dims), R[:, long_i], center)


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    sensor_pose: SensorPose = SensorPose()
    noise_sigma: float = 0.0
    rng_seed: int = 0
    tilt_deg: float = DEFAULT_TILT_DEG

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def solids(self, pose: SensorPose | None = None) -> list:
        pose = self.sensor_pose if pose is None else pose
        return [o.solid(pose, self.tilt_deg) for o in self.objects]

    def overlapping_pairs(self) -> list[tuple[int, int]]:
        """Index pairs whose bounding spheres intersect (conservative overlap check)."""
        out = []
        for i, a in enumerate(self.objects):
            for j in range(i + 1, len(self.objects)):
                b = self.objects[j]
                gap = np.linalg.norm(np.subtract(a.position, b.position))
                if gap < a.bounding_radius() + b.bounding_radius():
                    out.append((i, j))
        return out

    def with_pose(self, pose: SensorPose) -> "Scene":
        return replace(self, sensor_pose=pose)


@dataclass(frozen=True, eq=False)
class ScanLine:
    plane: ScanPlane
    points: np.ndarray  # (n, 3), sensor frame

    def __len__(self) -> int:
        return len(self.points)


# --------------------------------------------------------------------------
# Scene file format (JSON)


def scene_to_dict(scene: Scene) -> dict:
    objs = []
    for o in scene.objects:
        orient = o.orientation if isinstance(o.orientation, str) else [float(v) for v in o.orientation]
        objs.append(
            {
                "shape": o.shape,
                "size_mm": [float(v) for v in o.size_mm],
                "orientation": orient,
                "position": [float(v) for v in o.position],
            }
        )
    return {
        "objects": objs,
        "sensor_pose": {
            "position": [float(v) for v in scene.sensor_pose.position],
            "rotvec_deg": [float(v) for v in scene.sensor_pose.rotvec_deg],
        },
        "noise_sigma": float(scene.noise_sigma),
        "seed": int(scene.rng_seed),
        "tilt_deg": float(scene.tilt_deg),
    }


def scene_from_dict(data: dict) -> Scene:
    objs = []
    for o in data.get("objects", []):
        orient = o.get("orientation", "upright")
        if not isinstance(orient, str):
            orient = tuple(float(v) for v in orient)
        objs.append(
            SceneObject(
                shape=o["shape"],
                size_mm=tuple(float(v) for v in o["size_mm"]),
                orientation=orient,
                position=tuple(float(v) for v in o.get("position", (0.0, 0.0, 200.0))),
            )
        )
    pose = data.get("sensor_pose", {})
    return Scene(
        objects=tuple(objs),
        sensor_pose=SensorPose(
            tuple(float(v) for v in pose.get("position", (0.0, 0.0, 0.0))),
            tuple(float(v) for v in pose.get("rotvec_deg", (0.0, 0.0, 0.0))),
        ),
        noise_sigma=float(data.get("noise_sigma", 0.0)),
        rng_seed=int(data.get("seed", 0)),
        tilt_deg=float(data.get("tilt_deg", DEFAULT_TILT_DEG)),
    )


def dumps_scene(scene: Scene) -> str:
    # json writes floats with repr(), so the text round-trips bit-exactly
    return json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n"


def loads_scene(text: str, source: str = "<string>") -> Scene:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFileError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    try:
        return scene_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFileError(f"{source}: invalid scene: {exc}") from exc


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneFileError(f"{path}: {exc.strerror or exc}") from exc
    return loads_scene(text, str(path))


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(dumps_scene(scene))


# --------------------------------------------------------------------------
# Scan production


def in_capture_volume(points) -> np.ndarray:
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    lo, hi = CAPTURE_XY
    zlo, zhi = CAPTURE_Z
    return (
        (p[:, 0] >= lo) & (p[:, 0] <= hi)
        & (p[:, 1] >= lo) & (p[:, 1] <= hi)
        & (p[:, 2] >= zlo) & (p[:, 2] <= zhi)
    )


def truncate_to_volume(cloud) -> np.ndarray:
    """Keep points with x, y in [-50, 50] mm and z in [150, 250] mm (closed bounds)."""
    p = np.asarray(cloud, dtype=float).reshape(-1, 3)
    return p[in_capture_volume(p)]


def _rng(scene: Scene, seed: int | None) -> np.random.Generator:
    return np.random.default_rng(scene.rng_seed if seed is None else seed)


def _plane_rays(phi: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.outer(np.sin(phi), u) + np.outer(np.cos(phi), [0.0, 0.0, 1.0])


def _visible_state(solids, phi, u) -> tuple[np.ndarray, np.ndarray]:
    """Hit points and a segment label per ray: surface label, or -1 for a miss / outside the volume."""
    dirs = _plane_rays(phi, u)
    t, label = cast_rays(solids, dirs)
    with np.errstate(invalid="ignore"):
        pts = np.where(np.isfinite(t)[:, None], t[:, None] * dirs, np.nan)
    inside = np.isfinite(t) & in_capture_volume(np.nan_to_num(pts, nan=-1e9))
    return pts, np.where(inside, label, -1)


def _segment_ends(solids, u, phi_a, phi_b, la, lb, iters: int = 60) -> np.ndarray:
    """Bisect each ray interval [phi_a, phi_b] whose labels differ down to the transition.

    Returns the limit point on each visible side of every transition.
    """
    lo = phi_a.copy()
    hi = phi_b.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        _, lm = _visible_state(solids, mid, u)
        left = lm == la
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    out = []
    for side, lab in ((lo, la), (hi, lb)):
        pts, lab_side = _visible_state(solids, side, u)
        keep = (lab >= 0) & (lab_side == lab)
        out.append(pts[keep])
    return np.concatenate(out) if out else np.zeros((0, 3))


def _resample_by_arc(solids, u, phi, pts, label, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Re-cast each visible run of rays so samples sit ``spacing`` mm apart along the surface."""
    out_pts, out_phi = [], []
    change = np.flatnonzero(label[:-1] != label[1:]) + 1
    for run in np.split(np.arange(len(phi)), change):
        if label[run[0]] < 0:
            continue
        seg = pts[run]
        arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(seg, axis=0), axis=1))])
        n = int(math.ceil(arc[-1] / spacing)) + 1 if arc[-1] > 0 else 1
        new_phi = np.interp(np.linspace(0.0, arc[-1], n), arc, phi[run])
        p, lab = _visible_state(solids, new_phi, u)
        keep = lab == label[run[0]]
        out_pts.append(p[keep])
        out_phi.append(new_phi[keep])
    if not out_pts:
        return np.zeros((0, 3)), np.zeros(0)
    return np.concatenate(out_pts), np.concatenate(out_phi)


def analytic_scan(
    scene: Scene,
    n_lines: int = 4,
    spacing: float = ARC_SPACING,
    pose: SensorPose | None = None,
    seed: int | None = None,
) -> list[ScanLine]:
    """Exact first-hit samples of the visible object surfaces in each laser plane.

    Rays fan out inside every plane with an angular step that gives at most
    ``spacing`` mm between neighbouring rays at the far end of the capture
    volume; each visible run is then re-cast at ``spacing`` mm steps of arc
    length along the surface. Where the visible surface starts or stops between two rays
    (silhouette, face edge, occlusion, capture-volume wall) the exact end
    point is located by bisection and added, so curve ends are exact rather
    than quantised to the ray spacing. Noise, when the scene has any, is
    Gaussian and isotropic within the laser plane.
    """
    solids = scene.solids(pose)
    rng = _rng(scene, seed)
    phi_max = math.atan(math.hypot(CAPTURE_XY[1], CAPTURE_XY[1]) / CAPTURE_Z[0])
    step = spacing / CAPTURE_Z[1]
    n_rays = int(math.ceil(2 * phi_max / step)) + 1
    phi = np.linspace(-phi_max, phi_max, n_rays)
    scans = []
    for plane in scan_planes(n_lines):
        u = plane.in_plane_direction
        if solids:
            pts, label = _visible_state(solids, phi, u)
            change = np.flatnonzero(label[:-1] != label[1:])
            ends = _segment_ends(solids, u, phi[change], phi[change + 1], label[change], label[change + 1])
            body, body_phi = _resample_by_arc(solids, u, phi, pts, label, spacing)
            # keep samples in ray order, with each exact end point next to its neighbours
            ends_phi = np.arctan2(ends @ u, ends[:, 2])
            all_pts = np.concatenate([body, ends])
            all_phi = np.concatenate([body_phi, ends_phi])
            pts = all_pts[np.argsort(all_phi, kind="stable")]
        else:
            pts = np.zeros((0, 3))
        if scene.noise_sigma > 0 and len(pts):
            noise = rng.normal(0.0, scene.noise_sigma, size=(len(pts), 2))
            pts = pts + noise[:, :1] * u + noise[:, 1:] * np.array([0.0, 0.0, 1.0])
            pts = pts[in_capture_volume(pts)]
        scans.append(ScanLine(plane, pts))
    return scans


def pixel_rays(resolution=DEPTH_RESOLUTION, fov_deg=DEPTH_FOV_DEG) -> np.ndarray:
    """Unit ray directions through the pixel centres of a pinhole camera (row-major, y up)."""
    w, h = resolution
    if w <= 0 or h <= 0:
        raise ValueError("resolution must be positive")
    fx = (w / 2.0) / math.tan(math.radians(fov_deg[0]) / 2.0)
    fy = (h / 2.0) / math.tan(math.radians(fov_deg[1]) / 2.0)
    u = (np.arange(w) + 0.5 - w / 2.0) / fx
    v = -(np.arange(h) + 0.5 - h / 2.0) / fy
    uu, vv = np.meshgrid(u, v)
    d = np.stack([uu.ravel(), vv.ravel(), np.ones(uu.size)], axis=1)
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def emulate_depth_cloud(
    scene: Scene,
    resolution=DEPTH_RESOLUTION,
    fov_deg=DEPTH_FOV_DEG,
    pose: SensorPose | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """First-hit point cloud of a pinhole depth camera; noise is applied along each ray."""
    dirs = pixel_rays(resolution, fov_deg)
    solids = scene.solids(pose)
    if not solids:
        return np.zeros((0, 3))
    t, _ = cast_rays(solids, dirs)
    hit = np.isfinite(t)
    t = t[hit]
    if scene.noise_sigma > 0:
        t = t + _rng(scene, seed).normal(0.0, scene.noise_sigma, size=t.shape)
    return t[:, None] * dirs[hit]


def extract_scan_lines(cloud, n_lines: int = 4, tolerance: float = SCAN_TOLERANCE) -> list[ScanLine]:
    """Split a truncated cloud into laser scans.

    A point joins every plane it lies within ``tolerance`` mm of, so points
    near the optical axis can appear in more than one scan.
    """
    p = np.asarray(cloud, dtype=float).reshape(-1, 3)
    return [ScanLine(plane, p[plane.distance(p) <= tolerance]) for plane in scan_planes(n_lines)]


def cloud_scan(
    scene: Scene,
    n_lines: int = 4,
    resolution=DEPTH_RESOLUTION,
    pose: SensorPose | None = None,
    seed: int | None = None,
) -> list[ScanLine]:
    cloud = emulate_depth_cloud(scene, resolution, pose=pose, seed=seed)
    return extract_scan_lines(truncate_to_volume(cloud), n_lines)


def simulate_scans(scene: Scene, mode: str = "analytic", n_lines: int = 4, **kw) -> list[ScanLine]:
    if mode == "analytic":
        return analytic_scan(scene, n_lines, **kw)
    if mode == "cloud":
        return cloud_scan(scene, n_lines, **kw)
    raise ValueError(f"mode must be 'analytic' or 'cloud', got {mode!r}")


# --------------------------------------------------------------------------
# The ten-object grasping protocol: 2 spheres, 4 cylinders, 4 cuboids, grasp
# sizes 35-85 mm, cylinders and cuboids in the four orientations.

PROTOCOL_FRONT_Z = 170.0


def _placed(shape: str, size, orientation="upright") -> SceneObject:
    if shape == "cuboid":
        depth_half = size[2] / 2.0
    else:
        depth_half = size[0] / 2.0
    return SceneObject(shape, tuple(float(s) for s in size), orientation, (0.0, 0.0, PROTOCOL_FRONT_Z + depth_half))


PROTOCOL_OBJECTS: tuple[SceneObject, ...] = (
    _placed("sphere", (40.0,)),
    _placed("sphere", (65.0,)),
    _placed("cylinder", (35.0, 110.0), "upright"),
    _placed("cylinder", (55.0, 130.0), "laying"),
    _placed("cylinder", (45.0, 110.0), "tilted_left"),
    _placed("cylinder", (50.0, 110.0), "tilted_right"),
    _placed("cuboid", (140.0, 85.0, 60.0), "upright"),
    _placed("cuboid", (120.0, 50.0, 50.0), "laying"),
    _placed("cuboid", (110.0, 45.0, 40.0), "tilted_left"),
    _placed("cuboid", (100.0, 50.0, 40.0), "tilted_right"),
)


def protocol_scene(index: int, noise_sigma: float = 0.0, seed: int = 0, tilt_deg: float = DEFAULT_TILT_DEG) -> Scene:
    return Scene((PROTOCOL_OBJECTS[index],), SensorPose(), noise_sigma, seed, tilt_deg)
