"""Sample-consensus fitting of circles, lines and ellipses embedded in 3-D.

Each iteration draws a minimal sample (3, 2 or 6 points), fits the plane
through it, fits the primitive in that plane, scores every point by its 3-D
distance to the primitive, and keeps the model with the largest consensus.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from scangrasp.ellipse import (
    FIT_NOT_ELLIPSE,
    FIT_OK,
    conic_parameters,
    distances_to_ellipse,
    ellipse_inlier_mask,
    fit_conics,
)
from scangrasp.errors import FitFailure, InsufficientInputError
from scangrasp.geometry import Circle3, Ellipse3, Line3, Plane, cross3, perpendicular

KINDS = ("circle", "line", "ellipse")
SAMPLE_SIZE = {"circle": 3, "line": 2, "ellipse": 6}
# xor-ed into the user seed so each kind draws from its own stream
KIND_TAG = {"circle": 0x5C1C, "line": 0x11E0, "ellipse": 0xE111}
_CHUNKS = (16, 32, 64)


@dataclass(frozen=True)
class SacConfig:
    distance_threshold: float = 1.5
    max_iterations: int = 250
    rng_seed: int = 0
    min_inlier_fraction: float = 0.5
    # model validity limits (mm): circle radius / ellipse semi-minor, ellipse semi-major.
    # The floor keeps thin ellipses from swallowing both sides of a noisy line.
    radius_limits: tuple[float, float] = (10.0, 75.0)
    max_semi_major: float = 250.0
    # stop early once a sample of inliers has been drawn with this probability
    confidence: float = 0.999
    # least-squares refit on the final consensus set, kept only if it does not lose inliers
    refine: bool = True

    def __post_init__(self):
        if not self.distance_threshold > 0:
            raise ValueError("distance_threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 <= self.min_inlier_fraction <= 1.0:
            raise ValueError("min_inlier_fraction must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class PrimitiveFit:
    kind: str
    params: Circle3 | Line3 | Ellipse3
    inlier_indices: np.ndarray
    fit_percentage: float
    n_points: int
    iterations: int = 0

    @property
    def n_inliers(self) -> int:
        return len(self.inlier_indices)


class KindFits(NamedTuple):
    circle: PrimitiveFit | None
    line: PrimitiveFit | None
    ellipse: PrimitiveFit | None

    def get(self, kind: str) -> PrimitiveFit | None:
        return getattr(self, kind)

    def percentage(self, kind: str) -> float:
        fit = getattr(self, kind)
        return 0.0 if fit is None else fit.fit_percentage


# --- minimal-sample model constructors ---------------------------------------
# None marks a degenerate sample (skipped, not counted); REJECTED marks a
# sample that spans the plane but yields no model of the kind (counted).

REJECTED = object()


def circles_from_samples(samples) -> list:
    """Circumcircles for a stack of point triples (m, 3, 3); None where a triple is collinear."""
    samples = np.asarray(samples, dtype=float)
    a = samples[:, 0]
    ab = samples[:, 1] - a
    ac = samples[:, 2] - a
    n = np.cross(ab, ac)
    nn = np.einsum("ij,ij->i", n, n)
    ok = 0.5 * np.sqrt(nn) > 1e-9
    safe = np.where(ok, nn, 1.0)
    offset = (
        np.cross(n, ab) * np.einsum("ij,ij->i", ac, ac)[:, None]
        + np.cross(ac, n) * np.einsum("ij,ij->i", ab, ab)[:, None]
    ) / (2.0 * safe[:, None])
    radius = np.linalg.norm(offset, axis=1)
    normal = n / np.sqrt(safe)[:, None]
    center = a + offset
    return [Circle3(center[i], float(radius[i]), normal[i]) if ok[i] else None for i in range(len(samples))]


def circle_from_three(a, b, c) -> Circle3 | None:
    return circles_from_samples(np.stack([a, b, c])[None])[0]


def line_from_two(a, b) -> Line3 | None:
    d = b - a
    norm = float(np.linalg.norm(d))
    if norm <= 1e-9:
        return None
    return Line3(a.copy(), d / norm)


def sample_plane(points) -> Plane | None:
    """Average plane of a sample, with an in-plane frame aligned to the sensor axes."""
    centroid = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - centroid)
    if s[1] <= 1e-9 * max(s[0], 1.0):
        return None
    normal = vt[2]
    return Plane(centroid, normal, perpendicular(normal))


def ellipses_from_samples(samples) -> list:
    """Ellipse models for a stack of point sets (m, n, 3), one entry per set.

    Each set gets its average plane (centroid plus smallest singular
    direction), is expressed in that plane's 2-D frame and fitted with the
    direct conic method. Entries are Ellipse3, None (collinear set) or
    REJECTED (no real ellipse).
    """
    samples = np.asarray(samples, dtype=float)
    m = len(samples)
    centroid = samples.mean(axis=1)
    rel = samples - centroid[:, None, :]
    _, sv, vt = np.linalg.svd(rel)
    degenerate = sv[:, 1] <= 1e-9 * np.maximum(sv[:, 0], 1.0)
    normal = vt[:, 2]
    # in-plane frame: projected sensor x axis, or y when x is nearly normal
    lx = np.array([1.0, 0.0, 0.0]) - normal[:, :1] * normal
    use_y = np.linalg.norm(lx, axis=1) <= 1e-6
    ly_ref = np.array([0.0, 1.0, 0.0]) - normal[:, 1:2] * normal
    lx = np.where(use_y[:, None], ly_ref, lx)
    lx /= np.linalg.norm(lx, axis=1, keepdims=True)
    ly = np.cross(normal, lx)
    uv = np.stack([np.einsum("kni,ki->kn", rel, lx), np.einsum("kni,ki->kn", rel, ly)], axis=2)

    out: list = [None] * m
    live = np.flatnonzero(~degenerate)
    if len(live) == 0:
        return out
    coef, status = fit_conics(uv[live])
    center, major, minor, angle, ok = conic_parameters(np.nan_to_num(coef))
    ca, sa = np.cos(angle), np.sin(angle)
    for j, i in enumerate(live):
        if status[j] != FIT_OK:
            out[i] = REJECTED if status[j] == FIT_NOT_ELLIPSE else None
            continue
        if not ok[j]:
            out[i] = REJECTED
            continue
        c3 = centroid[i] + center[j, 0] * lx[i] + center[j, 1] * ly[i]
        ax = ca[j] * lx[i] + sa[j] * ly[i]
        out[i] = Ellipse3(c3, float(major[j]), float(minor[j]), normal[i].copy(), ax / np.linalg.norm(ax))
    return out


def ellipse_from_points(points):
    """Ellipse fitted to one point set; None if collinear, REJECTED if no ellipse fits."""
    return ellipses_from_samples(np.asarray(points, dtype=float)[None])[0]


def _models_from_samples(kind: str, samples: np.ndarray) -> list:
    if kind == "ellipse":
        return ellipses_from_samples(samples)
    if kind == "circle":
        return circles_from_samples(samples)
    return [line_from_two(*smp) for smp in samples]


def _model_valid(kind: str, model, cfg: SacConfig) -> bool:
    lo, hi = cfg.radius_limits
    if kind == "circle":
        return lo <= model.radius <= hi
    if kind == "ellipse":
        return lo <= model.semi_minor <= hi and model.semi_major <= cfg.max_semi_major
    return True


def model_distances(kind: str, model, points: np.ndarray) -> np.ndarray:
    """Exact 3-D distances from ``points`` to ``model``."""
    if kind == "ellipse":
        return distances_to_ellipse(points, model)
    return model.distance(points)


def inlier_mask(kind: str, model, points: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of points within ``threshold`` of ``model``."""
    if kind == "ellipse":
        return ellipse_inlier_mask(points, model, threshold)
    return model.distance(points) <= threshold


def _collinear(points: np.ndarray) -> bool:
    centered = points - points.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[1] <= 1e-9 * max(s[0], 1.0)


# --- least-squares refits on a consensus set --------------------------------


def refit_circle(points) -> Circle3 | None:
    plane = sample_plane(points)
    if plane is None:
        return None
    uv = plane.to_local(points)
    M = np.column_stack([2.0 * uv, np.ones(len(uv))])
    sol, *_ = np.linalg.lstsq(M, (uv**2).sum(axis=1), rcond=None)
    r2 = sol[2] + sol[0] ** 2 + sol[1] ** 2
    if r2 <= 0:
        return None
    return Circle3(plane.from_local(sol[:2]), math.sqrt(r2), plane.normal)


def refit_line(points) -> Line3 | None:
    centroid = points.mean(axis=0)
    _, s, vt = np.linalg.svd(points - centroid)
    if s[0] <= 1e-12:
        return None
    return Line3(centroid, vt[0])


def _refit(kind: str, points):
    if kind == "circle":
        return refit_circle(points)
    if kind == "line":
        return refit_line(points)
    return ellipse_from_points(points)


def _draw_samples(rng: np.random.Generator, n: int, k: int, m: int) -> np.ndarray:
    """``m`` samples of ``k`` distinct indices from range(n), as an (m, k) array."""
    keys = rng.random((m, n))
    return np.argpartition(keys, k - 1, axis=1)[:, :k] if k < n else np.argsort(keys, axis=1)


def _required_iterations(inlier_ratio: float, k: int, confidence: float) -> float:
    if inlier_ratio <= 0.0:
        return math.inf
    p_good = inlier_ratio**k
    if p_good >= 1.0:
        return 0.0
    return math.log(1.0 - confidence) / math.log(1.0 - p_good)


def ransac_fit(points, kind: str, cfg: SacConfig = SacConfig()) -> PrimitiveFit:
    """Best-consensus primitive of ``kind`` for ``points`` (an (n, 3) array).

    Raises InsufficientInputError when there are fewer points than the
    minimal sample, and FitFailure when no model reaches
    ``cfg.min_inlier_fraction``.
    """
    if kind not in SAMPLE_SIZE:
        raise ValueError(f"unknown primitive kind {kind!r}")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    k = SAMPLE_SIZE[kind]
    if n < k:
        raise InsufficientInputError(f"{kind} fit needs {k} points, got {n}")

    if kind != "line" and _collinear(pts):
        # every minimal sample would be degenerate
        raise FitFailure(f"points are collinear; no {kind} can be fitted")

    rng = np.random.default_rng(cfg.rng_seed ^ KIND_TAG[kind])
    thr = cfg.distance_threshold
    best_model = None
    best_mask = None
    best_count = 0
    iterations = 0
    draws = 0
    needed = math.inf
    max_draws = 10 * cfg.max_iterations
    chunk_no = 0
    done = False
    while not done and iterations < cfg.max_iterations and draws < max_draws:
        # Samples are drawn and turned into models a chunk at a time (the
        # chunk size grows on a fixed schedule) and then consumed strictly in
        # draw order; draws past the stopping point are simply discarded.
        m = min(_CHUNKS[min(chunk_no, len(_CHUNKS) - 1)], max_draws - draws)
        chunk_no += 1
        idx = _draw_samples(rng, n, k, m)
        for model in _models_from_samples(kind, pts[idx]):
            draws += 1
            if model is None:
                continue  # degenerate draws do not count against the budget
            iterations += 1
            if model is not REJECTED and _model_valid(kind, model, cfg):
                mask = inlier_mask(kind, model, pts, thr)
                count = int(mask.sum())
                if count > best_count:  # strict: earlier model wins ties
                    best_model, best_mask, best_count = model, mask, count
                    needed = _required_iterations(count / n, k, cfg.confidence)
            if iterations >= needed or iterations >= cfg.max_iterations:
                done = True
                break

    if best_model is None or best_count < cfg.min_inlier_fraction * n:
        raise FitFailure(f"no {kind} reached {cfg.min_inlier_fraction:.0%} consensus")
    if cfg.refine and best_count > k:
        model = _refit(kind, pts[best_mask])
        if model is not None and model is not REJECTED and _model_valid(kind, model, cfg):
            mask = inlier_mask(kind, model, pts, thr)
            if mask.sum() >= best_count:
                best_model, best_mask, best_count = model, mask, int(mask.sum())
    inliers = np.flatnonzero(best_mask)
    return PrimitiveFit(kind, best_model, inliers, 100.0 * best_count / n, n, iterations)


def fit_all_kinds(points, cfg: SacConfig = SacConfig(), parallel: bool = False) -> KindFits:
    """Fit all three primitive kinds; failed or impossible kinds come back as None."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)

    def one(kind):
        try:
            return ransac_fit(pts, kind, cfg)
        except (FitFailure, InsufficientInputError):
            return None

    if parallel:
        with ThreadPoolExecutor(max_workers=len(KINDS)) as pool:
            results = list(pool.map(one, KINDS))
    else:
        results = [one(kind) for kind in KINDS]
    return KindFits(*results)
