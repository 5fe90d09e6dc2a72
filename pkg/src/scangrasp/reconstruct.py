"""Shape classification and 3-D model reconstruction from per-scan primitive fits.

Pipeline for one frame: fit circle, line and ellipse to every scan, decide
the object class from the fit pattern, then rebuild the object from the
fitted primitives, their extreme inliers and (for cuboids and cylinders) the
principal direction found among the projected seed points.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from scangrasp.errors import (
    AmbiguousShapeError,
    DegenerateInputError,
    FitFailure,
    InsufficientInputError,
    InternalInconsistencyError,
    NoPrincipalDirectionError,
)
from scangrasp.geometry import (
    Circle3,
    Cuboid,
    Cylinder,
    Ellipse3,
    Line3,
    Plane,
    ScanPlane,
    ShapeModel,
    Sphere,
    angle_between,
    orient_away_from_sensor,
    plane_from_three_points,
    project_onto_plane,
    sort_counter_clockwise,
    unit,
)
from scangrasp.sac import KindFits, PrimitiveFit, SacConfig, fit_all_kinds
from scangrasp.scan_sim import CAPTURE_XY, ScanLine

ALPHA_MAX_DEG = 10.0
N_SEEDS = 8
# A curved scan is only called a line when the line fit is within this many
# percentage points of the best curved fit (simpler model wins near-ties).
LINE_MARGIN = 10.0
# The cylinder hypothesis must score more than this multiple of the sphere's.
TWICE = 2.0
# Ellipses with a smaller axis ratio count as circles (non-normative).
CIRCLE_RATIO = 1.05


@dataclass(frozen=True)
class ReconConfig:
    sac: SacConfig = SacConfig()
    alpha_max_deg: float = ALPHA_MAX_DEG
    line_margin: float = LINE_MARGIN
    twice_factor: float = TWICE
    parallel: bool = False


# --------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class Classification:
    shape: str
    labels: tuple[str | None, ...]  # "line" / "curved" / None per scan
    sphere_score: float
    cylinder_score: float
    cuboid_score: float

    @property
    def confidence(self) -> float:
        score = {"sphere": self.sphere_score, "cylinder": self.cylinder_score, "cuboid": self.cuboid_score}
        return score[self.shape] / 100.0


def scan_label(fits: KindFits, line_margin: float = LINE_MARGIN) -> str | None:
    """'line', 'curved' or None (nothing could be fitted)."""
    pc, pl, pe = fits.percentage("circle"), fits.percentage("line"), fits.percentage("ellipse")
    if pc == pl == pe == 0.0:
        return None
    if pl > 0.0 and pl + line_margin >= max(pc, pe):
        return "line"
    return "curved"


def classify(per_scan: Sequence[KindFits], cfg: ReconConfig = ReconConfig()) -> Classification:
    """Decide sphere / cuboid / cylinder from the per-scan fit results.

    Rules, applied to the scans that produced any fit:

    * every scan is best described by a line -> cuboid;
    * otherwise at most one line scan is allowed; the cylinder hypothesis
      (each scan an ellipse or a line) beats the sphere hypothesis (each
      scan a circle) only if its score is more than twice the sphere's;
      with no line scan the sphere is the fallback.

    A hypothesis scores as well as its worst-explained scan (minimum over
    scans of the relevant fit percentage).
    """
    labels = tuple(scan_label(f, cfg.line_margin) for f in per_scan)
    used = [i for i, lab in enumerate(labels) if lab is not None]
    need = min(2, len(per_scan))
    if len(used) < max(need, 1):
        raise AmbiguousShapeError("too few scans produced a fit", labels)

    fits = [per_scan[i] for i in used]
    sphere = min(f.percentage("circle") for f in fits)
    cylinder = min(max(f.percentage("ellipse"), f.percentage("line")) for f in fits)
    cuboid = min(f.percentage("line") for f in fits)
    n_line = sum(labels[i] == "line" for i in used)

    if n_line == len(used):
        shape = "cuboid"
    elif n_line <= 1 and cylinder > cfg.twice_factor * sphere:
        shape = "cylinder"
    elif n_line == 0:
        shape = "sphere"
    else:
        raise AmbiguousShapeError(
            f"{n_line} line scans among {len(used)} but the cylinder rule failed "
            f"(cylinder {cylinder:.1f}% vs sphere {sphere:.1f}%)",
            labels,
        )
    return Classification(shape, labels, sphere, cylinder, cuboid)


# --------------------------------------------------------------------------
# Extreme points and the seed turn-angle principal direction


def _arc_extremes(angles: np.ndarray) -> tuple[int, int]:
    """Positions (into ``angles``) of the two ends of the arc covered by the angles."""
    order = np.lexsort((np.arange(len(angles)), angles))
    a = angles[order]
    gaps = np.diff(np.concatenate([a, [a[0] + 2.0 * math.pi]]))
    g = int(np.argmax(gaps))
    # the arc runs from the point after the largest gap round to the point before it
    start = order[(g + 1) % len(a)]
    end = order[g]
    return int(start), int(end)


def extreme_inliers(fit: PrimitiveFit, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two inliers spanning the fit: arc ends for circles/ellipses, segment ends for lines."""
    idx = np.asarray(fit.inlier_indices)
    if len(idx) < 2:
        raise InsufficientInputError("need at least two inliers for extreme points")
    pts = np.asarray(points, dtype=float)[idx]
    model = fit.params
    if isinstance(model, Line3):
        s = (pts - model.point) @ model.direction
        i, j = int(np.argmin(s)), int(np.argmax(s))  # argmin/argmax return the lowest index on ties
        return pts[i], pts[j]
    if isinstance(model, Circle3):
        plane = Plane(model.center, model.normal)
        uv = plane.to_local(pts)
        ang = np.arctan2(uv[:, 1], uv[:, 0])
    elif isinstance(model, Ellipse3):
        q = pts - model.center
        u = q @ model.local_x_axis / model.semi_major
        v = q @ model.local_y_axis / model.semi_minor
        ang = np.arctan2(v, u)
    else:  # pragma: no cover
        raise TypeError(f"unsupported primitive {type(model).__name__}")
    i, j = _arc_extremes(ang)
    return pts[i], pts[j]


@dataclass(frozen=True, eq=False)
class SeedPoints:
    points: np.ndarray  # (N, 3), counter-clockwise on ``plane``
    plane: Plane


def make_seeds(extremes: Sequence[np.ndarray], plane: Plane) -> SeedPoints:
    projected = project_onto_plane(np.asarray(extremes, dtype=float), plane)
    return SeedPoints(sort_counter_clockwise(projected, plane), plane)


def principal_direction(seeds: SeedPoints | np.ndarray, alpha_max_deg: float = ALPHA_MAX_DEG) -> np.ndarray:
    """Edge direction at the first seed whose neighbours are nearly collinear with it.

    For i = 0..N-1 (cyclic) the turn angle between S_i - S_{i-1} and
    S_{i+1} - S_i is checked; the first i with a turn of at most
    ``alpha_max_deg`` gives the unit vector along S_{i+1} - S_{i-1}.
    """
    pts = seeds.points if isinstance(seeds, SeedPoints) else np.asarray(seeds, dtype=float)
    n = len(pts)
    if n < 3:
        raise InsufficientInputError("need at least three seed points")
    alpha = math.radians(alpha_max_deg)
    for i in range(n):
        prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
        a = cur - prev
        b = nxt - cur
        if np.linalg.norm(a) < 1e-9 or np.linalg.norm(b) < 1e-9:
            continue
        if angle_between(a, b) <= alpha:
            return unit(nxt - prev)
    raise NoPrincipalDirectionError(f"no seed turn angle within {alpha_max_deg} degrees")


def _max_area_plane(points: Sequence[np.ndarray]) -> Plane:
    """Plane through the triple of points that spans the largest triangle."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise InsufficientInputError("need three extreme points for a plane")
    best, best_area = None, 0.0
    for i, j, k in combinations(range(len(pts)), 3):
        area = 0.5 * np.linalg.norm(np.cross(pts[j] - pts[i], pts[k] - pts[i]))
        if area > best_area:
            best, best_area = (i, j, k), area
    if best is None:
        raise DegenerateInputError("all extreme points are collinear")
    return plane_from_three_points(*pts[list(best)])


# --------------------------------------------------------------------------
# Per-shape reconstruction


@dataclass(frozen=True, eq=False)
class ScanFit:
    """One scan's chosen primitive together with the scan it came from."""

    plane: ScanPlane
    fit: PrimitiveFit
    points: np.ndarray

    def extremes(self) -> tuple[np.ndarray, np.ndarray]:
        return extreme_inliers(self.fit, self.points)


def reconstruct_sphere(circles: Sequence[ScanFit]) -> Sphere:
    """Sphere from circle fits in distinct scan planes.

    The centre is the least-squares meeting point of the lines through each
    circle centre along its scan-plane normal; the radius is the mean
    distance from that centre to the circles' extreme inliers. A single
    circle gives only a degraded estimate (its own centre and radius).
    """
    if not circles:
        raise InsufficientInputError("no circle fits")
    for c in circles:
        if not isinstance(c.fit.params, Circle3):
            raise InternalInconsistencyError("sphere reconstruction needs circle fits")
    if len(circles) == 1:
        m = circles[0].fit.params
        return Sphere(m.center.copy(), float(m.radius))
    M = np.zeros((3, 3))
    rhs = np.zeros(3)
    for c in circles:
        n = c.plane.normal
        P = np.eye(3) - np.outer(n, n)
        M += P
        rhs += P @ c.fit.params.center
    if np.linalg.matrix_rank(M, tol=1e-9) < 3:
        raise DegenerateInputError("scan planes are parallel; sphere centre is undetermined")
    center = np.linalg.solve(M, rhs)
    ext = [e for c in circles for e in c.extremes()]
    radius = float(np.mean([np.linalg.norm(e - center) for e in ext]))
    return Sphere(center, radius)


def _extents(seeds: np.ndarray, u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    pu = seeds @ u
    pv = seeds @ v
    return float(pu.max() - pu.min()), float(pv.max() - pv.min())


def reconstruct_cuboid(lines: Sequence[ScanFit], alpha_max_deg: float = ALPHA_MAX_DEG) -> Cuboid:
    """Frontal face of a box from line fits.

    The face plane passes through the largest-area triple of extreme
    points; all extreme points projected onto it are the seeds. With the full
    set of eight seeds the first principal direction comes from the turn
    angle test; with fewer scans the first line's own direction is used.
    """
    for s in lines:
        if not isinstance(s.fit.params, Line3):
            raise InternalInconsistencyError("cuboid reconstruction needs line fits")
    if len(lines) < 2:
        raise InsufficientInputError("a cuboid face needs at least two line scans")
    ext = [e for s in lines for e in s.extremes()]
    plane = _max_area_plane(ext)
    seeds = make_seeds(ext, plane)
    if len(seeds.points) >= N_SEEDS:
        u = principal_direction(seeds, alpha_max_deg)
    else:
        d = lines[0].fit.params.direction
        u = unit(d - np.dot(d, plane.normal) * plane.normal)
    v = np.cross(plane.normal, u)
    eu, ev = _extents(seeds.points, u, v)
    if eu <= 0 or ev <= 0:
        raise DegenerateInputError("cuboid face has zero extent")
    return Cuboid(seeds.points.mean(axis=0), plane.normal, u, v, eu, ev)


def _roundness_key(s: "ScanFit") -> float:
    m = s.fit.params
    return m.axis_ratio if isinstance(m, Ellipse3) else 1.0


def reconstruct_cylinder(scans: Sequence[ScanFit], alpha_max_deg: float = ALPHA_MAX_DEG) -> Cylinder:
    """Cylinder from curved fits (ellipses or circles) plus at most one line.

    Centre: mean of the curved fits' centres. Radius: mean semi-minor axis
    (circle radius for circle fits). The longitudinal plane runs through
    the largest triangle of curved-fit extreme points; the axis comes from
    the seed turn-angle test, or with fewer than eight seeds from the line
    scan's direction or the major axis of the most elongated ellipse.
    """
    curved = [s for s in scans if isinstance(s.fit.params, (Ellipse3, Circle3))]
    lines = [s for s in scans if isinstance(s.fit.params, Line3)]
    if not curved:
        raise InternalInconsistencyError("cylinder reconstruction reached with line fits only")

    centers = np.array([s.fit.params.center for s in curved])
    center = centers.mean(axis=0)
    radii = [
        s.fit.params.semi_minor if isinstance(s.fit.params, Ellipse3) else s.fit.params.radius for s in curved
    ]
    radius = float(np.mean(radii))

    # Oblique cuts are long arcs that end on the caps or the capture-volume
    # wall; the two roundest cross-sections end on the silhouette lines,
    # which are parallel to the axis, so the plane is built from those.
    roundest = sorted(curved, key=_roundness_key)[:2]
    plane_ext = [e for s in roundest for e in s.extremes()]
    all_ext = [e for s in curved for e in s.extremes()] + [e for s in lines for e in s.extremes()]
    try:
        plane = _max_area_plane(plane_ext)
    except (InsufficientInputError, DegenerateInputError):
        plane = None

    if plane is not None and len(all_ext) >= N_SEEDS:
        seeds = make_seeds(all_ext, plane)
        axis = principal_direction(seeds, alpha_max_deg)
    else:
        if lines:
            axis = unit(lines[0].fit.params.direction)
        else:
            ell = [s.fit.params for s in curved if isinstance(s.fit.params, Ellipse3)]
            if not ell:
                raise InsufficientInputError("no elongated cross-section to infer the cylinder axis from")
            most = max(ell, key=lambda e: e.axis_ratio)
            axis = unit(most.local_x_axis)
        if plane is None:
            # plane containing the axis, facing the sensor as well as it can
            n = np.cross(axis, np.cross(center, axis))
            if np.linalg.norm(n) < 1e-9:
                raise DegenerateInputError("cylinder axis points at the sensor")
            plane = Plane(center, orient_away_from_sensor(n, center))
    # express the axis in a sign-stable way: pointing up, or right when horizontal
    if axis[1] < -1e-12 or (abs(axis[1]) <= 1e-12 and axis[0] < 0):
        axis = -axis
    along = np.asarray(all_ext) @ axis
    length = float(along.max() - along.min())
    if length <= 0:
        length = 2.0 * radius
    return Cylinder(center, axis, radius, length)


# --------------------------------------------------------------------------
# Whole-frame reconstruction


@dataclass(frozen=True, eq=False)
class ScanDiagnostics:
    plane: ScanPlane
    n_points: int
    fits: KindFits
    label: str | None
    touches_boundary: bool


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    model: ShapeModel
    per_scan_fits: tuple[PrimitiveFit, ...]
    shape_confidence: float
    elapsed_ms: float
    classification: Classification
    diagnostics: tuple[ScanDiagnostics, ...] = ()

    ok = True

    @property
    def shape(self) -> str:
        return self.model.kind


@dataclass(frozen=True, eq=False)
class NotReconstructed:
    reason: str  # no-data | ambiguous | fit-failure | no-principal-direction | degenerate
    message: str
    elapsed_ms: float
    diagnostics: tuple[ScanDiagnostics, ...] = ()
    labels: tuple[str | None, ...] = field(default=())

    ok = False
    model = None
    shape = None


def _touches_boundary(points: np.ndarray, margin: float = 1.0) -> bool:
    if len(points) == 0:
        return False
    lo, hi = CAPTURE_XY
    xy = points[:, :2]
    return bool(np.any((xy <= lo + margin) | (xy >= hi - margin)))


def _fit_scans(scans: Sequence[ScanLine], cfg: ReconConfig) -> list[KindFits]:
    def one(scan: ScanLine) -> KindFits:
        return fit_all_kinds(scan.points, cfg.sac)

    if cfg.parallel and len(scans) > 1:
        with ThreadPoolExecutor(max_workers=len(scans)) as pool:
            return list(pool.map(one, scans))
    return [one(s) for s in scans]


def _chosen_fits(shape: str, scans, per_scan, labels) -> list[ScanFit]:
    out = []
    for scan, fits, lab in zip(scans, per_scan, labels):
        if lab is None:
            continue
        if shape == "sphere":
            fit = fits.circle
        elif shape == "cuboid":
            fit = fits.line
        elif lab == "line":
            fit = fits.line
        else:
            fit = fits.ellipse if fits.ellipse is not None else fits.circle
        if fit is not None:
            out.append(ScanFit(scan.plane, fit, scan.points))
    return out


def reconstruct(scans: Sequence[ScanLine], cfg: ReconConfig = ReconConfig()):
    """Fit, classify and rebuild the target from one frame of scans.

    Returns a ReconstructionReport, or NotReconstructed carrying the reason
    and per-scan diagnostics when the frame does not yield a model.
    """
    t0 = time.perf_counter()
    scans = list(scans)

    def elapsed() -> float:
        return (time.perf_counter() - t0) * 1000.0

    if not scans or all(len(s) == 0 for s in scans):
        return NotReconstructed("no-data", "no scan points", elapsed())

    per_scan = _fit_scans(scans, cfg)
    labels = tuple(scan_label(f, cfg.line_margin) for f in per_scan)
    diags = tuple(
        ScanDiagnostics(s.plane, len(s), f, lab, _touches_boundary(s.points))
        for s, f, lab in zip(scans, per_scan, labels)
    )
    if all(lab is None for lab in labels):
        return NotReconstructed("fit-failure", "no primitive reached consensus on any scan", elapsed(), diags, labels)
    try:
        cls = classify(per_scan, cfg)
    except AmbiguousShapeError as exc:
        return NotReconstructed("ambiguous", str(exc), elapsed(), diags, labels)

    chosen = _chosen_fits(cls.shape, scans, per_scan, cls.labels)
    try:
        if cls.shape == "sphere":
            model = reconstruct_sphere(chosen)
        elif cls.shape == "cuboid":
            model = reconstruct_cuboid(chosen, cfg.alpha_max_deg)
        else:
            model = reconstruct_cylinder(chosen, cfg.alpha_max_deg)
    except NoPrincipalDirectionError as exc:
        return NotReconstructed("no-principal-direction", str(exc), elapsed(), diags, labels)
    except (DegenerateInputError, InsufficientInputError, FitFailure) as exc:
        return NotReconstructed("degenerate", str(exc), elapsed(), diags, labels)
    return ReconstructionReport(
        model, tuple(c.fit for c in chosen), cls.confidence, elapsed(), cls, diags
    )
