"""Narrowing iteration, cluster splitting, and along-curve ordering."""
from __future__ import annotations

import logging

import numpy as np
import pytest

from faultline.narrower import (
    MIN_CLUSTER_SIZE,
    NarrowConfig,
    cluster,
    narrow,
    order_along_curve,
    polyline_self_intersects,
)


def _dist_to_curve(pts: np.ndarray, curve: np.ndarray) -> np.ndarray:
    # independent dense-sampling route: min distance point by point
    d = np.hypot(
        pts[:, None, 0] - curve[None, :, 0], pts[:, None, 1] - curve[None, :, 1]
    )
    return d.min(axis=1)


def _total_turning(pts: np.ndarray) -> float:
    v = np.diff(pts, axis=0)
    ang = np.arctan2(v[:, 1], v[:, 0])
    step = np.diff(ang)
    step = (step + np.pi) % (2.0 * np.pi) - np.pi
    return float(step.sum())


def test_collinear_points_are_fixed_and_tangents_align():
    rng = np.random.default_rng(0)
    t = np.sort(rng.random(60))
    pts = np.column_stack([t, 2.0 * t])
    out = narrow(pts)
    np.testing.assert_allclose(out.xy, pts, atol=1e-9)
    want = np.array([1.0, 2.0]) / np.hypot(1.0, 2.0)
    dots = out.tangents @ want
    np.testing.assert_allclose(np.abs(dots), 1.0, atol=1e-9)
    np.testing.assert_allclose(np.hypot(*out.tangents.T), 1.0, atol=1e-12)


def _noisy_parabola(seed: int = 5, n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(-1.0, 1.0, n))
    pts = np.column_stack([t, t * t])
    normals = np.column_stack([-2.0 * t, np.ones_like(t)])
    normals /= np.hypot(*normals.T)[:, None]
    noisy = pts + rng.uniform(-1e-2, 1e-2, n)[:, None] * normals
    s = np.linspace(-1.1, 1.1, 20001)
    return noisy, np.column_stack([s, s * s])


def test_noisy_parabola_contracts_toward_curve():
    noisy, curve = _noisy_parabola()
    out = narrow(noisy)
    before = _dist_to_curve(noisy, curve)
    after = _dist_to_curve(out.xy, curve)
    assert np.median(after) <= 3e-3
    assert after.max() <= before.max()
    assert np.median(after) < 0.5 * np.median(before)


def test_noisy_parabola_worst_point_lands_within_band():
    # known to fail: a quadratic fit over 10 neighbors keeps a noise
    # floor of about sigma * sqrt(2.25 / k) per point, so the worst of
    # 200 points stays near 7e-3 under amplitude-1e-2 noise; kept as
    # executable documentation of the defaults' actual accuracy
    noisy, curve = _noisy_parabola()
    out = narrow(noisy)
    worst = float(_dist_to_curve(out.xy, curve).max())
    assert worst <= 2e-3, f"max orthogonal distance {worst:.2e} > 2e-3"


def test_outlier_approaches_line_every_iteration():
    t = np.linspace(0.0, 1.0, 40)
    pts = np.column_stack([t, np.zeros_like(t)])
    pts[20, 1] = 0.08
    gaps = []
    cur = pts
    for _ in range(3):
        cur = narrow(cur, NarrowConfig(iterations=1)).xy
        gaps.append(abs(cur[20, 1]))
    assert gaps[0] < 0.08
    assert gaps[1] < gaps[0]
    assert gaps[2] < gaps[1]


def test_single_iteration_movement_is_bounded_by_neighborhood():
    rng = np.random.default_rng(11)
    pts = rng.random((120, 2))
    cfg = NarrowConfig(iterations=1)
    out = narrow(pts, cfg)
    from scipy.spatial import cKDTree

    d, _ = cKDTree(pts).query(pts, k=cfg.knn + 1)
    moved = np.hypot(*(out.xy - pts).T)
    assert np.all(moved <= d.max(axis=1) + 1e-12)


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(7)
    t = np.sort(rng.uniform(-1.0, 1.0, 150))
    pts = np.column_stack([t, t * t]) + rng.normal(0.0, 5e-3, (150, 2))
    ang = 0.7
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    shift = np.array([0.3, -0.2])
    plain = narrow(pts)
    moved = narrow(pts @ rot.T + shift)
    np.testing.assert_allclose(moved.xy, plain.xy @ rot.T + shift, atol=1e-9)
    dots = np.einsum("ij,ij->i", moved.tangents, plain.tangents @ rot.T)
    np.testing.assert_allclose(np.abs(dots), 1.0, atol=1e-9)


def test_tiny_input_passes_through_with_warning(caplog):
    pts = np.array([[0.0, 0.0], [1.0, 1.0]])
    with caplog.at_level(logging.WARNING, logger="faultline.narrower"):
        out = narrow(pts)
    np.testing.assert_array_equal(out.xy, pts)
    assert any("degenerate" in r.message.lower() for r in caplog.records)


def test_source_indices_are_carried():
    pts = np.random.default_rng(2).random((30, 2))
    src = np.arange(100, 130)
    out = narrow(pts, source_indices=src)
    np.testing.assert_array_equal(out.source_indices, src)


def test_cluster_splits_well_separated_blobs():
    rng = np.random.default_rng(3)
    a = rng.normal(0.0, 0.02, (20, 2))
    b = rng.normal(0.0, 0.02, (20, 2)) + np.array([1.0, 0.0])
    pts = np.vstack([a, b])
    groups = cluster(pts, link_radius=0.15)
    assert len(groups) == 2
    assert sorted(np.concatenate(groups).tolist()) == list(range(40))
    assert groups[0].tolist() == sorted(range(0, 20))
    assert groups[1].tolist() == sorted(range(20, 40))


def test_cluster_merges_when_link_radius_spans_gap():
    rng = np.random.default_rng(3)
    a = rng.normal(0.0, 0.02, (20, 2))
    b = rng.normal(0.0, 0.02, (20, 2)) + np.array([1.0, 0.0])
    groups = cluster(np.vstack([a, b]), link_radius=2.0)
    assert len(groups) == 1
    assert len(groups[0]) == 40


def test_cluster_discards_small_components():
    rng = np.random.default_rng(4)
    a = rng.normal(0.0, 0.02, (20, 2))
    stray = rng.normal(0.0, 0.02, (MIN_CLUSTER_SIZE - 1, 2)) + np.array([3.0, 3.0])
    groups = cluster(np.vstack([a, stray]), link_radius=0.15)
    assert len(groups) == 1
    assert groups[0].tolist() == list(range(20))


def test_ordering_on_shuffled_segment_is_monotone():
    rng = np.random.default_rng(8)
    x = np.sort(rng.random(50))
    pts = np.column_stack([x, np.zeros_like(x)])
    perm = rng.permutation(50)
    order = order_along_curve(pts[perm])
    assert len(order) == 50
    walked = pts[perm][order][:, 0]
    assert np.all(np.diff(walked) > 0) or np.all(np.diff(walked) < 0)


def test_ordering_quarter_circle_turns_ninety_degrees():
    rng = np.random.default_rng(9)
    theta = np.sort(rng.uniform(0.0, np.pi / 2.0, 80))
    pts = 0.4 * np.column_stack([np.cos(theta), np.sin(theta)])
    perm = rng.permutation(len(pts))
    order = order_along_curve(pts[perm])
    assert len(order) >= 0.9 * len(pts)
    walked = pts[perm][order]
    chords = np.hypot(*np.diff(walked, axis=0).T)
    nn = np.hypot(*np.diff(pts, axis=0).T)
    assert chords.max() <= 2.0 * np.median(nn) + np.max(nn)
    assert abs(abs(_total_turning(walked)) - np.pi / 2.0) <= 0.2


def test_ordering_open_loop_has_no_self_intersection():
    rng = np.random.default_rng(12)
    theta = np.sort(rng.uniform(0.0, 1.5 * np.pi, 120))
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    perm = rng.permutation(len(pts))
    order = order_along_curve(pts[perm])
    assert len(order) >= 0.9 * len(pts)
    assert not polyline_self_intersects(pts[perm][order])


def test_ordering_covers_both_sides_of_a_midcurve_start():
    # a density gap makes the gap-edge point score as one-sided, so the
    # walk starts mid-curve and must also traverse the stranded side
    left = np.linspace(0.0, 0.4, 41)
    right = np.linspace(0.6, 1.0, 41)
    x = np.concatenate([[0.4], left[:-1], right])
    pts = np.column_stack([x, np.zeros_like(x)])
    order = order_along_curve(pts)
    assert len(order) == len(pts)
    walked = pts[order]
    assert np.all(np.diff(walked[:, 0]) > 0) or np.all(np.diff(walked[:, 0]) < 0)


def test_self_intersection_helper_detects_bowtie():
    bow = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    assert polyline_self_intersects(bow)
    straight = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.1], [3.0, 0.0]])
    assert not polyline_self_intersects(straight)


def test_narrow_config_validation():
    with pytest.raises(ValueError):
        NarrowConfig(knn=1)
    with pytest.raises(ValueError):
        NarrowConfig(iterations=0)
