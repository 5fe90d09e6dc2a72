import numpy as np
import pytest

from scangrasp.errors import FitFailure, InsufficientInputError
from scangrasp.geometry import Circle3, Ellipse3, unit
from scangrasp.sac import KINDS, SacConfig, circle_from_three, fit_all_kinds, ransac_fit

THR = 1.0


def circle_points(n, radius=30.0, center=(0, 0, 200), normal=(1, 0, 1), t=None):
    normal = unit(np.asarray(normal, dtype=float))
    u = unit(np.cross(normal, [0, 1, 0]))
    v = np.cross(normal, u)
    if t is None:
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.asarray(center, dtype=float) + radius * (np.outer(np.cos(t), u) + np.outer(np.sin(t), v))


def test_exact_circle_in_tilted_plane():
    pts = circle_points(50)
    fit = ransac_fit(pts, "circle", SacConfig(distance_threshold=THR))
    assert fit.fit_percentage == 100.0
    assert np.allclose(fit.params.center, [0, 0, 200], atol=1e-6)
    assert abs(fit.params.radius - 30) < 1e-6


def test_circle_with_outliers_matches_generator_labels():
    rng = np.random.default_rng(7)
    inl = circle_points(80)
    out = np.column_stack([rng.uniform(-50, 50, 20), rng.uniform(-50, 50, 20), rng.uniform(150, 250, 20)])
    pts = np.concatenate([inl, out])[rng.permutation(100)]
    truth = Circle3(np.array([0, 0, 200.0]), 30.0, unit(np.array([1.0, 0, 1])))
    labels = truth.distance(pts) <= THR
    fit = ransac_fit(pts, "circle", SacConfig(distance_threshold=THR, rng_seed=3))
    assert np.array_equal(np.flatnonzero(labels), fit.inlier_indices)


def test_line_scores_below_circle_on_circle_data():
    pts = circle_points(60, radius=10.0)
    cfg = SacConfig(distance_threshold=THR, min_inlier_fraction=0.0)
    fits = fit_all_kinds(pts, cfg)
    assert fits.percentage("line") < fits.percentage("circle")


def test_segment_is_pure_line():
    pts = np.column_stack([np.linspace(-40, 40, 50), np.zeros(50), np.full(50, 200.0)])
    fits = fit_all_kinds(pts, SacConfig(distance_threshold=THR))
    assert fits.line.fit_percentage == 100.0
    assert fits.circle is None or fits.circle.fit_percentage < 100.0
    assert fits.ellipse is None or fits.ellipse.fit_percentage < 100.0


def test_ellipse_arc_scores_at_least_circle():
    e = Ellipse3(np.array([0, 0, 200.0]), 45.0, 25.0, unit(np.array([0, 1.0, 1])), np.array([1.0, 0, 0]))
    pts = e.sample(np.linspace(-1.2, 1.8, 80))
    fits = fit_all_kinds(pts, SacConfig(distance_threshold=THR, min_inlier_fraction=0.0))
    assert fits.percentage("ellipse") >= fits.percentage("circle")
    assert fits.percentage("ellipse") == 100.0


def test_empty_input_gives_no_fits():
    fits = fit_all_kinds(np.zeros((0, 3)))
    assert fits == (None, None, None)


def test_too_few_points_raise():
    with pytest.raises(InsufficientInputError):
        ransac_fit(np.zeros((2, 3)), "circle")
    with pytest.raises(ValueError):
        ransac_fit(np.zeros((5, 3)), "parabola")


def test_collinear_points_have_no_circle():
    pts = np.column_stack([np.arange(10.0), np.zeros(10), np.zeros(10)])
    with pytest.raises(FitFailure):
        ransac_fit(pts, "circle")


def test_consensus_floor_raises():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-50, 50, (60, 3))
    with pytest.raises(FitFailure):
        ransac_fit(pts, "line", SacConfig(distance_threshold=0.5))


def test_config_validation():
    with pytest.raises(ValueError):
        SacConfig(distance_threshold=0)
    with pytest.raises(ValueError):
        SacConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SacConfig(min_inlier_fraction=1.5)


def test_seeded_runs_are_identical_and_kinds_independent():
    rng = np.random.default_rng(11)
    pts = circle_points(70) + rng.normal(scale=0.7, size=(70, 3))
    cfg = SacConfig(rng_seed=99)
    a = fit_all_kinds(pts, cfg)
    b = fit_all_kinds(pts, cfg, parallel=True)
    for kind in KINDS:
        fa, fb = a.get(kind), b.get(kind)
        assert (fa is None) == (fb is None)
        if fa is not None:
            assert np.array_equal(fa.inlier_indices, fb.inlier_indices)
            assert fa.iterations == fb.iterations
    # a kind's result does not depend on whether other kinds ran first
    solo = ransac_fit(pts, "circle", cfg)
    assert np.array_equal(solo.inlier_indices, a.circle.inlier_indices)


def test_iteration_budget_respected():
    rng = np.random.default_rng(5)
    pts = np.concatenate([circle_points(30), rng.uniform(-50, 50, (30, 3)) + [0, 0, 200]])
    fit = ransac_fit(pts, "circle", SacConfig(max_iterations=7, min_inlier_fraction=0.0))
    assert fit.iterations <= 7


def test_circumcircle_of_collinear_triple_is_none():
    assert circle_from_three(np.zeros(3), np.ones(3), 2 * np.ones(3)) is None
