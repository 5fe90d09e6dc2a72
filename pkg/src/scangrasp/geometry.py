"""Shared geometric vocabulary.

Sensor frame is right-handed: x right, y up, z forward along the optical
axis. All lengths are millimetres; angles on the public surface are degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from scangrasp.errors import DegenerateInputError, InsufficientInputError

OPTICAL_AXIS = np.array([0.0, 0.0, 1.0])
SCAN_ANGLES_DEG = (0.0, 45.0, 90.0, 135.0)
# Scan subsets used for the degraded configurations: a single horizontal
# line, and a horizontal/vertical pair.
SCAN_SUBSETS = {1: (0,), 2: (0, 2), 4: (0, 1, 2, 3)}


def as_point(p) -> np.ndarray:
    return np.asarray(p, dtype=float).reshape(3)


def unit(v, eps: float = 1e-12) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < eps:
        raise DegenerateInputError("cannot normalise a zero-length vector")
    return v / n


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors (much cheaper than np.cross for single vectors)."""
    return np.array(
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    )


def angle_between(u, v) -> float:
    """Unsigned angle in radians between two vectors (atan2 form, stable near 0 and pi)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))


def axis_angle_deg(u, v) -> float:
    """Angle between two undirected axes, folded to [0, 90] degrees."""
    a = math.degrees(angle_between(u, v))
    return min(a, 180.0 - a)


def perpendicular(n) -> np.ndarray:
    """A deterministic unit vector orthogonal to ``n``.

    Prefers the projection of the sensor x axis, then y, so that in-plane
    frames line up with the image axes whenever possible.
    """
    n = unit(n)
    for ref in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        v = ref - np.dot(ref, n) * n
        if np.linalg.norm(v) > 1e-6:
            return unit(v)
    raise DegenerateInputError("no perpendicular found")  # pragma: no cover


@dataclass(frozen=True)
class Plane:
    point: np.ndarray
    normal: np.ndarray
    local_x: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        normal = np.asarray(self.normal, dtype=float).reshape(3)
        if np.linalg.norm(normal) < 1e-12:
            raise DegenerateInputError("plane normal is zero")
        normal = unit(normal)
        object.__setattr__(self, "normal", normal)
        lx = self.local_x
        if lx is None:
            lx = perpendicular(normal)
        else:
            lx = np.asarray(lx, dtype=float).reshape(3)
            lx = unit(lx - np.dot(lx, normal) * normal)
        object.__setattr__(self, "local_x", lx)
        object.__setattr__(self, "_local_y", cross3(normal, lx))

    @property
    def local_y(self) -> np.ndarray:
        return self._local_y

    def signed_distance(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.point) @ self.normal

    def to_local(self, points) -> np.ndarray:
        """In-plane 2-D coordinates of ``points`` (out-of-plane part discarded)."""
        d = np.asarray(points, dtype=float) - self.point
        return np.stack([d @ self.local_x, d @ self.local_y], axis=-1)

    def from_local(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        return self.point + uv[..., :1] * self.local_x + uv[..., 1:2] * self.local_y


@dataclass(frozen=True)
class ScanPlane:
    """One laser plane; it always contains the optical z axis."""

    index: int
    dihedral_angle: float

    @property
    def in_plane_direction(self) -> np.ndarray:
        t = math.radians(self.dihedral_angle)
        return np.array([math.cos(t), math.sin(t), 0.0])

    @property
    def normal(self) -> np.ndarray:
        t = math.radians(self.dihedral_angle)
        return np.array([-math.sin(t), math.cos(t), 0.0])

    @property
    def plane(self) -> Plane:
        return Plane(np.zeros(3), self.normal, self.in_plane_direction)

    def distance(self, points) -> np.ndarray:
        return np.abs(np.asarray(points, dtype=float) @ self.normal)


def scan_planes(n_lines: int = 4) -> list[ScanPlane]:
    if n_lines not in SCAN_SUBSETS:
        raise ValueError(f"n_lines must be one of {sorted(SCAN_SUBSETS)}, got {n_lines}")
    return [ScanPlane(i, SCAN_ANGLES_DEG[i]) for i in SCAN_SUBSETS[n_lines]]


@dataclass(frozen=True)
class Circle3:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    def distance(self, points) -> np.ndarray:
        q = np.asarray(points, dtype=float) - self.center
        h = q @ self.normal
        radial = np.linalg.norm(q - h[:, None] * self.normal, axis=1)
        return np.hypot(radial - self.radius, h)


@dataclass(frozen=True)
class Line3:
    point: np.ndarray
    direction: np.ndarray

    def distance(self, points) -> np.ndarray:
        q = np.asarray(points, dtype=float) - self.point
        along = q @ self.direction
        return np.sqrt(np.maximum(np.einsum("ij,ij->i", q, q) - along * along, 0.0))


@dataclass(frozen=True)
class Ellipse3:
    """Parametric ellipse in 3-D: 3 + 1 + 1 + 3 + 3 = 11 scalars."""

    center: np.ndarray
    semi_major: float
    semi_minor: float
    plane_normal: np.ndarray
    local_x_axis: np.ndarray

    @property
    def local_y_axis(self) -> np.ndarray:
        return cross3(self.plane_normal, self.local_x_axis)

    @property
    def plane(self) -> Plane:
        return Plane(self.center, self.plane_normal, self.local_x_axis)

    @property
    def axis_ratio(self) -> float:
        return self.semi_major / self.semi_minor

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.center, [self.semi_major, self.semi_minor], self.plane_normal, self.local_x_axis]
        )

    def sample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (
            self.center
            + (self.semi_major * np.cos(t))[..., None] * self.local_x_axis
            + (self.semi_minor * np.sin(t))[..., None] * self.local_y_axis
        )


# Reconstructed 3-D models. Field names follow the grasp-oriented view of the
# object: what the hand needs is a center, an orientation and a grasp size.


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float
    kind: str = field(default="sphere", init=False)

    @property
    def grasp_size(self) -> float:
        return 2.0 * self.radius


@dataclass(frozen=True)
class Cylinder:
    center: np.ndarray
    axis: np.ndarray
    radius: float
    length: float
    kind: str = field(default="cylinder", init=False)

    @property
    def grasp_size(self) -> float:
        return 2.0 * self.radius

    @property
    def principal_axis(self) -> np.ndarray:
        return self.axis


@dataclass(frozen=True)
class Cuboid:
    """Frontal face of a box; depth along the face normal is not observable."""

    face_center: np.ndarray
    face_normal: np.ndarray
    principal_u: np.ndarray
    principal_v: np.ndarray
    extent_u: float
    extent_v: float
    kind: str = field(default="cuboid", init=False)

    @property
    def grasp_size(self) -> float:
        return min(self.extent_u, self.extent_v)

    @property
    def principal_axis(self) -> np.ndarray:
        """Direction of the longer face extent."""
        return self.principal_u if self.extent_u >= self.extent_v else self.principal_v


ShapeModel = Sphere | Cylinder | Cuboid


def orient_away_from_sensor(normal, point) -> np.ndarray:
    """Flip ``normal`` so that it has non-negative dot product with the ray to ``point``."""
    normal = np.asarray(normal, dtype=float)
    if float(np.dot(normal, point)) < 0.0:
        return -normal
    return normal


def project_onto_plane(p, plane: Plane) -> np.ndarray:
    """Orthogonal projection of one point or an (n, 3) array onto ``plane``."""
    p = np.asarray(p, dtype=float)
    d = (p - plane.point) @ plane.normal
    return p - np.multiply.outer(d, plane.normal)


def plane_from_three_points(a, b, c) -> Plane:
    a, b, c = as_point(a), as_point(b), as_point(c)
    n = np.cross(b - a, c - a)
    area = 0.5 * np.linalg.norm(n)
    if area <= 1e-9:
        raise DegenerateInputError("points are collinear; pick a different triple")
    point = (a + b + c) / 3.0
    return Plane(point, orient_away_from_sensor(n, point))


def fit_plane(points) -> Plane:
    """Least-squares plane through ``points`` (normal = smallest singular direction)."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise InsufficientInputError("a plane needs at least three points")
    centroid = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - centroid)
    if s[1] <= 1e-9 * max(s[0], 1.0):
        raise DegenerateInputError("points are collinear")
    return Plane(centroid, orient_away_from_sensor(vt[2], centroid))


def sort_counter_clockwise(points: Sequence, plane: Plane) -> np.ndarray:
    """Order points counter-clockwise about ``plane.normal`` around their centroid.

    The first point is the one with the smallest polar angle measured from the
    plane's local x axis, which makes the ordering reproducible.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise InsufficientInputError("need at least three points to define an ordering")
    uv = plane.to_local(pts)
    rel = uv - uv.mean(axis=0)
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    order = np.lexsort((np.arange(len(pts)), ang))
    return pts[order]


def rotation_about(axis, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation matrix."""
    k = unit(axis)
    t = math.radians(angle_deg)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(t) * K + (1 - math.cos(t)) * (K @ K)
