"""Aiming guidance: convex hull of the scan points seen along the optical axis
and the mapping of the nearest-hull vector to four vibrotactor channels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

VOLUME_WIDTH = 100.0  # mm, lateral width of the capture volume
SINGLE_TACTOR_BAND_DEG = 10.0
HOLD_AMPLITUDE = 0.2
# channel order and the in-image direction each channel stands for
TACTORS = ("up", "right", "down", "left")
TACTOR_ANGLES_DEG = (90.0, 0.0, 270.0, 180.0)

# forward error bound of the float orientation determinant (Shewchuk's ccwerrboundA)
_ORIENT_EPS = (3.0 + 16.0 * 2.0**-53) * 2.0**-53


def project_xy(points) -> np.ndarray:
    """Drop the z coordinate; (n, 3) -> (n, 2), order preserved."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.zeros((0, 2))
    return pts.reshape(-1, 3)[:, :2].copy()


def orient2d(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 counter-clockwise, -1 clockwise, 0 collinear.

    Exact for float inputs: a float evaluation decides whenever it clears
    the rounding-error bound, otherwise rational arithmetic settles it.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    left = (bx - ax) * (cy - ay)
    right = (by - ay) * (cx - ax)
    det = left - right
    bound = _ORIENT_EPS * (abs(left) + abs(right))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    fa = (Fraction(ax), Fraction(ay))
    fb = (Fraction(bx), Fraction(by))
    fc = (Fraction(cx), Fraction(cy))
    exact = (fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0])
    return (exact > 0) - (exact < 0)


@dataclass(frozen=True, eq=False)
class Hull2:
    """Convex hull vertices, counter-clockwise, no collinear vertex kept.

    One vertex when all points coincide, two when they are collinear.
    """

    vertices: np.ndarray  # (k, 2)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    def vertex_set(self) -> set[tuple[float, float]]:
        return {(float(x), float(y)) for x, y in self.vertices}


def _hull_side(pts: list[tuple[float, float]], a, b, out: list) -> None:
    """Append the hull vertices strictly left of a -> b, in order from a to b (exclusive)."""
    left = [p for p in pts if orient2d(a, b, p) > 0]
    if not left:
        return
    # farthest point from the line; ties broken towards a so the choice is unique
    ax, ay = a
    bx, by = b

    def dist(p):
        return (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)

    far = max(left, key=lambda p: (dist(p), -((p[0] - ax) ** 2 + (p[1] - ay) ** 2)))
    _hull_side(left, a, far, out)
    out.append(far)
    _hull_side(left, far, b, out)


def quickhull(points_2d) -> Hull2:
    """Convex hull by recursive QuickHull with exact orientation tests."""
    pts = [(float(x), float(y)) for x, y in np.asarray(points_2d, dtype=float).reshape(-1, 2)]
    if not pts:
        raise ValueError("quickhull needs at least one point")
    uniq = sorted(set(pts))
    a, b = uniq[0], uniq[-1]  # lexicographic extremes are always hull vertices
    if a == b:
        return Hull2(np.array([a]))
    upper: list = []  # left of a -> b, ordered from a to b
    lower: list = []  # left of b -> a, ordered from b to a
    _hull_side(uniq, a, b, upper)
    _hull_side(uniq, b, a, lower)
    cw = [a] + upper + [b] + lower
    return Hull2(np.array([cw[0]] + cw[:0:-1]))


def brute_force_hull(points_2d) -> set[tuple[float, float]]:
    """Reference hull vertex set: a point is a vertex when some other point makes
    an edge with it that has every point on its left or strictly inside the segment."""
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points_2d, dtype=float).reshape(-1, 2)})
    if len(pts) <= 1:
        return set(pts)
    verts = set()
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i == j:
                continue
            ok = True
            for k, r in enumerate(pts):
                if k in (i, j):
                    continue
                o = orient2d(p, q, r)
                if o < 0:
                    ok = False
                    break
                if o == 0:
                    # r collinear: must lie strictly between p and q
                    dot = (r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1])
                    len2 = (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2
                    if not (0 < dot < len2):
                        ok = False
                        break
            if ok:
                verts.add(p)
                verts.add(q)
    return verts


@dataclass(frozen=True)
class HullDistance:
    inside: bool
    vector: tuple[float, float]  # from the query to the nearest hull point
    distance: float


def _closest_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    den = float(d @ d)
    if den == 0.0:
        return a
    t = min(max(float((p - a) @ d) / den, 0.0), 1.0)
    return a + t * d


def contains_strictly(hull: Hull2, query=(0.0, 0.0)) -> bool:
    v = hull.vertices
    if len(v) < 3:
        return False
    n = len(v)
    return all(orient2d(v[i], v[(i + 1) % n], query) > 0 for i in range(n))


def shortest_vector_to_hull(hull: Hull2, query=(0.0, 0.0)) -> HullDistance:
    """Vector from ``query`` to the nearest point of the hull boundary, or inside."""
    q = np.asarray(query, dtype=float)
    v = hull.vertices
    if len(v) == 0:
        raise ValueError("empty hull")
    if contains_strictly(hull, q):
        return HullDistance(True, (0.0, 0.0), 0.0)
    if len(v) == 1:
        best = v[0]
    else:
        n = len(v)
        edges = [(v[i], v[(i + 1) % n]) for i in range(n if n > 2 else 1)]
        cands = [_closest_on_segment(q, a, b) for a, b in edges]
        best = min(cands, key=lambda c: float((c - q) @ (c - q)))
    vec = best - q
    return HullDistance(False, (float(vec[0]), float(vec[1])), float(math.hypot(vec[0], vec[1])))


def tactor_amplitudes(
    vector,
    distance: float,
    volume_width: float = VOLUME_WIDTH,
    single_band_deg: float = SINGLE_TACTOR_BAND_DEG,
) -> np.ndarray:
    """Channel amplitudes (up, right, down, left) that point the user along ``vector``.

    The base amplitude falls linearly from 1 at the hull to 0 at one volume
    width away. Within ``single_band_deg`` of a channel's direction only that
    channel fires; otherwise the two flanking channels share the base
    amplitude as |cos| and |sin| of the vector angle.
    """
    if not distance > 0:
        raise ValueError("tactor amplitudes need a positive distance; a zero distance is the locked case")
    x, y = float(vector[0]), float(vector[1])
    base = min(max(1.0 - distance / volume_width, 0.0), 1.0)
    amps = np.zeros(4)
    theta = math.degrees(math.atan2(y, x)) % 360.0
    for ch, ang in enumerate(TACTOR_ANGLES_DEG):
        off = abs((theta - ang + 180.0) % 360.0 - 180.0)
        if off <= single_band_deg:
            amps[ch] = base
            return amps
    c = math.cos(math.radians(theta))
    s = math.sin(math.radians(theta))
    amps[1 if c > 0 else 3] = base * abs(c)
    amps[0 if s > 0 else 2] = base * abs(s)
    return amps


@dataclass(frozen=True)
class NoObject:
    kind = "no-object"

    @property
    def amplitudes(self) -> np.ndarray:
        return np.zeros(4)


@dataclass(frozen=True, eq=False)
class Directional:
    """Guidance towards the hull; ``holding`` marks the steady cue shown while
    the axis is on the object but no model could be built."""

    amplitudes: np.ndarray
    vector: tuple[float, float] = (0.0, 0.0)
    distance: float = 0.0
    holding: bool = False
    kind = "directional"

    def active_channels(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.amplitudes > 0))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Directional)
            and np.array_equal(self.amplitudes, other.amplitudes)
            and self.holding == other.holding
        )


@dataclass(frozen=True)
class Locked:
    kind = "locked"

    @property
    def amplitudes(self) -> np.ndarray:
        return np.ones(4)


FeedbackState = NoObject | Directional | Locked


def scan_hull(scans: Sequence) -> Hull2 | None:
    pts = [project_xy(s.points) for s in scans if len(s.points)]
    if not pts:
        return None
    return quickhull(np.concatenate(pts))


def feedback_step(
    scans: Sequence,
    recon_ok: bool,
    volume_width: float = VOLUME_WIDTH,
    single_band_deg: float = SINGLE_TACTOR_BAND_DEG,
) -> FeedbackState:
    """One frame of aiming feedback from the captured scan points."""
    hull = scan_hull(scans)
    if hull is None:
        return NoObject()
    hd = shortest_vector_to_hull(hull)
    if hd.inside:
        if recon_ok:
            return Locked()
        return Directional(np.full(4, HOLD_AMPLITUDE), hd.vector, 0.0, holding=True)
    if hd.distance == 0.0:
        # on the hull boundary: aim is not inside, nudge cannot be computed
        return Directional(np.full(4, HOLD_AMPLITUDE), hd.vector, 0.0, holding=True)
    amps = tactor_amplitudes(hd.vector, hd.distance, volume_width, single_band_deg)
    return Directional(amps, hd.vector, hd.distance)
