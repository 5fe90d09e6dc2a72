"""Direct least-squares ellipse fitting and point-to-ellipse distance.

The fit solves the ellipse-constrained generalized eigenproblem through the
numerically stable 3x3 reduction (Halir & Flusser), on centred and scaled
data. The distance search restricts itself to the quarter arc facing the
query point and runs a golden-section search over the ellipse parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scangrasp.errors import FitFailure, InsufficientInputError, NotAnEllipseError
from scangrasp.geometry import Ellipse3, Plane

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_TOL = 1e-9  # radians


@dataclass(frozen=True)
class Conic:
    """Coefficients of a x^2 + b xy + c y^2 + d x + e y + f = 0."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def coefficients(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f])

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def evaluate(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        x, y = xy[..., 0], xy[..., 1]
        return self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f

    def normalized(self) -> "Conic":
        """Rescale so that 4ac - b^2 = 1."""
        k = -self.discriminant
        if k <= 0:
            raise NotAnEllipseError("conic is not an ellipse (b^2 - 4ac >= 0)")
        return Conic(*(self.coefficients() / math.sqrt(k)))


# status codes returned by the batched fit
FIT_OK, FIT_COINCIDENT, FIT_COLLINEAR, FIT_NOT_ELLIPSE = 0, 1, 2, 3
_FIT_MESSAGES = {
    FIT_COINCIDENT: "points are coincident",
    FIT_COLLINEAR: "points are collinear",
    FIT_NOT_ELLIPSE: "no ellipse solution in the constrained eigensystem",
}


def fit_conics(points_2d) -> tuple[np.ndarray, np.ndarray]:
    """Direct ellipse fit applied independently to a stack of point sets.

    ``points_2d`` has shape (m, n, 2) with n >= 6. Returns conic coefficients
    (m, 6), scaled so that 4ac - b^2 = 1, and an integer status per set
    (FIT_OK or the reason the set has no ellipse fit). Rows whose status is
    not FIT_OK hold NaN.
    """
    pts = np.asarray(points_2d, dtype=float)
    m = pts.shape[0]
    status = np.zeros(m, dtype=int)
    mean = pts.mean(axis=1)
    rel = pts - mean[:, None, :]
    scale = np.sqrt((rel**2).sum(axis=2).mean(axis=1))
    status[~(np.isfinite(scale) & (scale >= 1e-12))] = FIT_COINCIDENT
    safe_scale = np.where(status == FIT_OK, scale, 1.0)
    x = rel[:, :, 0] / safe_scale[:, None]
    y = rel[:, :, 1] / safe_scale[:, None]

    D1 = np.stack([x * x, x * y, y * y], axis=2)
    D2 = np.stack([x, y, np.ones_like(x)], axis=2)
    S1 = np.einsum("kni,knj->kij", D1, D1)
    S2 = np.einsum("kni,knj->kij", D1, D2)
    S3 = np.einsum("kni,knj->kij", D2, D2)
    with np.errstate(all="ignore"):
        cond_s3 = np.linalg.cond(S3)
    status[(status == FIT_OK) & ~(cond_s3 <= 1e12)] = FIT_COLLINEAR
    good = status == FIT_OK
    S3[~good] = np.eye(3)
    T = -np.linalg.solve(S3, np.swapaxes(S2, 1, 2))
    M = S1 + S2 @ T
    # premultiply by the inverse of the 3x3 constraint block
    M = np.stack([M[:, 2] / 2.0, -M[:, 1], M[:, 0] / 2.0], axis=1)
    M[~good] = np.eye(3)
    _, vecs = np.linalg.eig(M)
    vecs = np.real(vecs)
    cond = 4.0 * vecs[:, 0] * vecs[:, 2] - vecs[:, 1] ** 2
    # Exactly one eigenvector satisfies the constraint in exact arithmetic;
    # if rounding lets more through, keep the best algebraic fit.
    with np.errstate(all="ignore"):
        a1_all = vecs / np.sqrt(np.where(cond > 0, cond, 1.0))[:, None, :]
        a2_all = T @ a1_all
        resid = np.linalg.norm(D1 @ a1_all + D2 @ a2_all, axis=1)
    resid = np.where(cond > 0, resid, np.inf)
    status[good & ~np.any(cond > 0, axis=1)] = FIT_NOT_ELLIPSE
    j = np.argmin(resid, axis=1)
    rows = np.arange(m)
    a1 = vecs[rows, :, j]
    a2 = np.einsum("kij,kj->ki", T, a1)
    A, B, C = a1[:, 0], a1[:, 1], a1[:, 2]
    Dn, En, Fn = a2[:, 0], a2[:, 1], a2[:, 2]

    # undo the normalisation x' = (x - mx)/s, y' = (y - my)/s
    mx, my = mean[:, 0], mean[:, 1]
    s = safe_scale
    s2 = s * s
    coef = np.stack(
        [
            A / s2,
            B / s2,
            C / s2,
            -2 * A * mx / s2 - B * my / s2 + Dn / s,
            -B * mx / s2 - 2 * C * my / s2 + En / s,
            (A * mx * mx + B * mx * my + C * my * my) / s2 - (Dn * mx + En * my) / s + Fn,
        ],
        axis=1,
    )
    k = 4.0 * coef[:, 0] * coef[:, 2] - coef[:, 1] ** 2
    status[(status == FIT_OK) & ~(k > 0)] = FIT_NOT_ELLIPSE
    with np.errstate(all="ignore"):
        coef = coef / np.sqrt(k)[:, None]
    coef[status != FIT_OK] = np.nan
    return coef, status


def fit_conic_direct(points_2d) -> Conic:
    """Fit an ellipse conic to >= 6 planar points.

    Raises InsufficientInputError for fewer than six points and FitFailure
    when the constrained eigensystem has no ellipse solution (collinear or
    coincident points, among others).
    """
    pts = np.asarray(points_2d, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points_2d must be an (n, 2) array")
    if len(pts) < 6:
        raise InsufficientInputError(f"ellipse fit needs at least 6 points, got {len(pts)}")
    coef, status = fit_conics(pts[None])
    if status[0] != FIT_OK:
        raise FitFailure(_FIT_MESSAGES[int(status[0])])
    return Conic(*(float(c) for c in coef[0]))


def conic_parameters(coef) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised centre, semi-axes and major-axis angle for a stack of conics (m, 6).

    Returns (center (m, 2), semi_major, semi_minor, angle, ok); the angle is
    canonicalised to (-pi/2, pi/2] and ``ok`` is False where the conic is
    not a real ellipse.
    """
    coef = np.asarray(coef, dtype=float).reshape(-1, 6)
    a, b, c, d, e, f = coef.T
    with np.errstate(all="ignore"):
        ok = b * b - 4 * a * c < 0
        Q = np.empty((len(coef), 2, 2))
        Q[:, 0, 0] = a
        Q[:, 0, 1] = Q[:, 1, 0] = b / 2.0
        Q[:, 1, 1] = c
        Qs = np.where(ok[:, None, None], Q, np.eye(2))
        center = np.linalg.solve(2.0 * Qs, np.stack([-d, -e], axis=1)[..., None])[..., 0]
        cx, cy = center[:, 0], center[:, 1]
        kval = a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f
        lam, vec = np.linalg.eigh(Qs)
        axes = -kval[:, None] / lam
        ok &= np.all(np.isfinite(axes) & (axes > 0), axis=1)
        axes = np.sqrt(np.where(ok[:, None], axes, 1.0))
    i_major = np.argmax(axes, axis=1)
    rows = np.arange(len(coef))
    semi_major = axes[rows, i_major]
    semi_minor = axes[rows, 1 - i_major]
    v = vec[rows, :, i_major]
    angle = np.arctan2(v[:, 1], v[:, 0])
    angle = np.where(angle <= -math.pi / 2, angle + math.pi, angle)
    angle = np.where(angle > math.pi / 2, angle - math.pi, angle)
    return center, semi_major, semi_minor, angle, ok


def conic_parameters_2d(conic: Conic) -> tuple[np.ndarray, float, float, float]:
    """Center, semi-major, semi-minor and major-axis angle of an ellipse conic.

    The angle is canonicalised to (-pi/2, pi/2].
    """
    if conic.discriminant >= 0:
        raise NotAnEllipseError("conic is not an ellipse (b^2 - 4ac >= 0)")
    center, major, minor, angle, ok = conic_parameters(conic.coefficients()[None])
    if not ok[0]:
        raise NotAnEllipseError("conic describes an imaginary or degenerate ellipse")
    return center[0], float(major[0]), float(minor[0]), float(angle[0])


def conic_to_parametric(conic: Conic, plane: Plane) -> Ellipse3:
    """Embed a 2-D ellipse conic (in ``plane``'s local frame) as an 11-parameter ellipse."""
    center, semi_major, semi_minor, angle = conic_parameters_2d(conic)
    center3 = plane.from_local(center)
    lx = math.cos(angle) * plane.local_x + math.sin(angle) * plane.local_y
    return Ellipse3(center3, semi_major, semi_minor, plane.normal.copy(), lx / np.linalg.norm(lx))


def _local_coords(points, e: Ellipse3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    q = np.atleast_2d(np.asarray(points, dtype=float)) - e.center
    u = q @ e.local_x_axis
    v = q @ e.local_y_axis
    h = q @ e.plane_normal
    return u, v, h


def quadrant_code(u, v) -> np.ndarray:
    """Quadrant (1..4) of local coordinates.

    Points on a half-axis join the lower-numbered of the two adjacent
    quadrants; the center belongs to quadrant 1.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.select(
        [(u >= 0) & (v >= 0), (u < 0) & (v >= 0), (u <= 0) & (v < 0)],
        [1, 2, 3],
        default=4,
    )


def quadrant_of(point, e: Ellipse3) -> int:
    u, v, _ = _local_coords(point, e)
    return int(quadrant_code(u, v)[0])


def _quadrant_brackets(q) -> tuple[np.ndarray, np.ndarray]:
    lo = (np.asarray(q) - 1) * (math.pi / 2.0)
    return lo, lo + math.pi / 2.0


def golden_section_min(f, lo, hi, tol: float = GOLDEN_TOL):
    """Vectorised golden-section minimisation of ``f`` over per-element brackets.

    ``f`` maps an array of parameters to an array of objective values. Returns
    the arg-min estimate for each bracket. The bracket shrinks by the inverse
    golden ratio each step until it is below ``tol``.
    """
    a = np.array(lo, dtype=float, copy=True)
    b = np.array(hi, dtype=float, copy=True)
    width = float(np.max(b - a)) if a.size else 0.0
    if width <= tol:
        return 0.5 * (a + b)
    n = int(math.ceil(math.log(tol / width) / math.log(INV_PHI)))
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(n):
        left = fc < fd
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        # the surviving interior probe is reused; one fresh evaluation per step
        keep = np.where(left, c, d)
        fkeep = np.where(left, fc, fd)
        probe = np.where(left, b - INV_PHI * (b - a), a + INV_PHI * (b - a))
        fp = f(probe)
        c = np.where(left, probe, keep)
        d = np.where(left, keep, probe)
        fc = np.where(left, fp, fkeep)
        fd = np.where(left, fkeep, fp)
    return 0.5 * (a + b)


def in_plane_distances(u, v, semi_major: float, semi_minor: float) -> np.ndarray:
    """Distances from local 2-D points (u, v) to the axis-aligned ellipse, via quadrant golden search."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.size == 0:
        return np.zeros(0)
    A, B = semi_major, semi_minor
    lo, hi = _quadrant_brackets(quadrant_code(u, v))

    def sqdist(t):
        return (u - A * np.cos(t)) ** 2 + (v - B * np.sin(t)) ** 2

    t = golden_section_min(sqdist, lo, hi)
    best = sqdist(t)
    # quadrant endpoints guard the seams where the arc minimum may sit on the bracket edge
    best = np.minimum(best, sqdist(lo))
    best = np.minimum(best, sqdist(hi))
    return np.sqrt(best)


def distances_to_ellipse(points, e: Ellipse3) -> np.ndarray:
    """Full 3-D distances from an (n, 3) array of points to the ellipse curve."""
    u, v, h = _local_coords(points, e)
    d = in_plane_distances(u, v, e.semi_major, e.semi_minor)
    return np.hypot(d, h)


def distance_to_ellipse(point, e: Ellipse3) -> float:
    return float(distances_to_ellipse(point, e)[0])


def _quadrant_newton(u, v, A: float, B: float, steps: int = 8):
    """Newton iteration for the foot point, confined to each point's quadrant arc.

    Returns the in-plane distance at the final iterate and a flag telling
    whether the iterate is a converged interior stationary point or a
    bracket end with the slope pointing outwards. Where the flag is set the
    value equals the quadrant minimum the golden-section search converges to.
    """
    lo, hi = _quadrant_brackets(quadrant_code(u, v))
    t = np.arctan2(A * v, B * u)
    t = np.clip(lo + np.mod(t - lo, 2.0 * math.pi), lo, hi)
    k = A * A - B * B
    d1 = np.zeros_like(t)
    for _ in range(steps):
        c, s = np.cos(t), np.sin(t)
        # half first and second derivatives of the squared distance
        d1 = u * A * s - v * B * c - k * s * c
        d2 = u * A * c + v * B * s - k * (c * c - s * s)
        step = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), 0.0)
        t = np.clip(t - step, lo, hi)
    c, s = np.cos(t), np.sin(t)
    d1 = u * A * s - v * B * c - k * s * c
    scale = A * (np.abs(u) + np.abs(v) + A)
    flat = np.abs(d1) <= 1e-10 * scale
    at_lo = (t == lo) & (d1 >= 0)
    at_hi = (t == hi) & (d1 <= 0)
    return np.hypot(u - A * c, v - B * s), flat | at_lo | at_hi


def ellipse_inlier_mask(points, e: Ellipse3, threshold: float) -> np.ndarray:
    """Points whose 3-D distance to ``e`` is at most ``threshold``.

    Gives the same answer as thresholding :func:`distances_to_ellipse` but
    runs the golden-section search only for points that cheap tests cannot
    decide. Every point within d of the curve has elliptic radius within
    1 +- d/B (the parallel band lies between two scaled copies of the
    ellipse); inside that band a quadrant-confined Newton solve settles the
    rest unless it fails to converge or lands right at the threshold.
    """
    u, v, h = _local_coords(points, e)
    A, B = e.semi_major, e.semi_minor
    budget = np.sqrt(np.maximum(threshold * threshold - h * h, 0.0))
    g = np.sqrt((u / A) ** 2 + (v / B) ** 2)
    mask = (np.abs(h) <= threshold) & (np.abs(g - 1.0) <= budget / B)
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        return mask
    d, ok = _quadrant_newton(u[idx], v[idx], A, B)
    ok &= np.abs(d - budget[idx]) > 1e-7
    mask[idx[ok]] = d[ok] <= budget[idx[ok]]
    rest = idx[~ok]
    if len(rest):
        d = in_plane_distances(u[rest], v[rest], A, B)
        mask[rest] = np.hypot(d, h[rest]) <= threshold
    return mask
