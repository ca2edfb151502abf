"""Tests for the tactile-image pipeline and joint-angle lookup."""
import itertools
import math

import numpy as np
import pytest

from linkfold import finger as fg, optics as op, perception as pc
from linkfold.errors import (ConditioningError, DomainError,
                             FeatureExtractionError, ValidationError)


@pytest.fixture(scope="module")
def params():
    return fg.reference_finger()


def _blank(h=200, w=400, value=0):
    return pc.RasterImage(np.full((h, w), value, np.uint8))


def _rect_image(rects, h=200, w=400, value=200):
    img = np.zeros((h, w), np.uint8)
    for x0, y0, x1, y1 in rects:
        img[y0:y1, x0:x1] = value
    return pc.RasterImage(img)


# ---------------------------------------------------------------------------
# Domain type validation


def test_raster_image_validation():
    with pytest.raises(ValidationError):
        pc.RasterImage(np.zeros((4, 4), float))
    with pytest.raises(ValidationError):
        pc.RasterImage(np.zeros((0, 4), np.uint8))
    with pytest.raises(ValidationError):
        pc.RasterImage(np.zeros(16, np.uint8))


def test_quad_feature_validation():
    with pytest.raises(ValidationError):
        pc.QuadFeature("a", np.array([[0, 0], [0, 1], [1, 1], [1, 0]]))  # CW
    with pytest.raises(ValidationError):
        pc.QuadFeature("a", np.array([[0, 0], [2, 0], [1, 0.1], [0, 2]]))
    q = pc.QuadFeature("a", np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]]))
    assert q.pad_id == "a"


def test_homography_validation():
    with pytest.raises(ConditioningError):
        pc.Homography(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        pc.Homography(np.eye(4))


# ---------------------------------------------------------------------------
# Thresholding


def test_threshold_uniform():
    assert not pc.threshold_global(_blank(value=0)).any()
    assert pc.threshold_global(_blank(value=255)).all()
    with pytest.raises(DomainError):
        pc.threshold_global(_blank(), level=300)


# ---------------------------------------------------------------------------
# Contours


def test_single_rectangle_contour():
    img = _rect_image([(50, 40, 150, 120)])
    cs = pc.extract_contours(pc.threshold_global(img))
    assert len(cs) == 1
    c = cs[0]
    w, h = 100, 80
    assert abs(len(c) - 2 * (w + h)) <= 8
    assert pc.polygon_area(c) > 0          # counterclockwise
    # boundary pixels only: every point on the rectangle border
    assert c[:, 0].min() == 50 and c[:, 0].max() == 149
    assert c[:, 1].min() == 40 and c[:, 1].max() == 119


def test_two_disjoint_squares():
    img = _rect_image([(10, 10, 50, 50), (200, 100, 260, 160)])
    cs = pc.extract_contours(pc.threshold_global(img))
    assert len(cs) == 2


def test_checkerboard_rejected():
    data = np.indices((64, 64)).sum(axis=0) % 2 * 255
    cs = pc.extract_contours(data.astype(np.uint8) >= 100)
    assert cs == []


def test_small_blob_rejected():
    img = _rect_image([(10, 10, 20, 20)])     # 100 px < 500
    assert pc.extract_contours(pc.threshold_global(img)) == []


# ---------------------------------------------------------------------------
# Convex hull


def _brute_hull_vertices(points):
    """O(n^3) hull: a point is a vertex iff some half-plane through it
    and another point has all remaining points strictly on one side."""
    pts = [tuple(p) for p in points]
    verts = set()
    for a, b in itertools.permutations(pts, 2):
        ab = (b[0] - a[0], b[1] - a[1])
        cr = [(ab[0] * (p[1] - a[1]) - ab[1] * (p[0] - a[0]))
              for p in pts if p not in (a, b)]
        if all(c > 1e-12 for c in cr):
            verts.add(a)
            verts.add(b)
    return verts


def test_hull_square_with_interior():
    pts = np.array([[0, 0], [4, 0], [4, 4], [0, 4],
                    [2, 2], [1, 3], [3, 1]], float)
    hull = pc.convex_hull(pts)
    assert sorted(map(tuple, hull)) == [(0, 0), (0, 4), (4, 0), (4, 4)]
    assert pc.polygon_area(hull) > 0


def test_hull_idempotent():
    pts = np.array([[0, 0], [5, 1], [6, 5], [2, 7], [-1, 3]], float)
    h1 = pc.convex_hull(pts)
    h2 = pc.convex_hull(h1)
    assert sorted(map(tuple, h1)) == sorted(map(tuple, h2))


def test_hull_contains_all_points():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(10_000, 2))
    hull = pc.convex_hull(pts)
    v = np.vstack([hull, hull[:1]])
    for a, b in zip(v[:-1], v[1:]):
        side = ((b[0] - a[0]) * (pts[:, 1] - a[1])
                - (b[1] - a[1]) * (pts[:, 0] - a[0]))
        assert side.min() >= -1e-9


def test_hull_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(10):
        pts = rng.random((50, 2)) * 100
        hull = pc.convex_hull(pts)
        assert set(map(tuple, hull)) == _brute_hull_vertices(pts)


def test_hull_collinear_degenerate():
    with pytest.raises(FeatureExtractionError):
        pc.convex_hull(np.array([[0, 0], [1, 1], [2, 2], [3, 3]], float))


# ---------------------------------------------------------------------------
# Polygon approximation


def _square_loop(c=30.0, half=10.0, angle_deg=0.0, per_side=25):
    """Dense boundary samples of a square, optionally rotated."""
    corners = np.array([[-half, -half], [half, -half],
                        [half, half], [-half, half]])
    a = math.radians(angle_deg)
    R = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    corners = corners @ R.T + c
    pts = []
    for i in range(4):
        p0, p1 = corners[i], corners[(i + 1) % 4]
        for t in np.linspace(0, 1, per_side, endpoint=False):
            pts.append(p0 + t * (p1 - p0))
    return np.array(pts), corners


def test_rdp_square_with_collinear_midpoints():
    loop, corners = _square_loop(per_side=2)    # corners plus midpoints
    quad = pc.approx_polygon(loop, epsilon=2.0)
    assert sorted(map(tuple, quad.vertices)) == sorted(map(tuple, corners))


def test_rdp_rotated_square():
    loop, corners = _square_loop(angle_deg=30.0)
    quad = pc.approx_polygon(loop, epsilon=2.0)
    for c in corners:
        assert np.min(np.linalg.norm(quad.vertices - c, axis=1)) <= 1.0


def test_rdp_vertices_subset_of_input():
    loop, _ = _square_loop(angle_deg=17.0)
    quad = pc.approx_polygon(loop, epsilon=2.0)
    inset = {tuple(p) for p in loop}
    assert all(tuple(v) in inset for v in quad.vertices)


def test_rdp_circle_fails():
    t = np.linspace(0, 2 * math.pi, 400, endpoint=False)
    loop = np.stack([100 + 40 * np.cos(t), 100 + 40 * np.sin(t)], axis=1)
    with pytest.raises(FeatureExtractionError):
        pc.approx_polygon(loop, epsilon=2.0)


def test_rdp_epsilon_validation():
    loop, _ = _square_loop()
    with pytest.raises(DomainError):
        pc.approx_polygon(loop, epsilon=0.0)


def test_canonical_start_corner():
    loop, _ = _square_loop(angle_deg=0.0)
    quad = pc.approx_polygon(loop, epsilon=2.0)
    v = quad.vertices
    # topmost (smallest y), then leftmost, and counterclockwise in image axes
    key = sorted(range(4), key=lambda i: (v[i, 1], v[i, 0]))[0]
    assert key == 0
    assert pc.polygon_area(v) > 0


# ---------------------------------------------------------------------------
# Homography and unwarp


def _unit_square():
    return np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])


def test_homography_identity():
    quad = pc.QuadFeature("a", _unit_square())
    H = pc.fit_homography(quad, _unit_square())
    assert np.allclose(H.matrix, np.eye(3), atol=1e-9)


def test_homography_recovers_known_warp():
    H0 = np.array([[1.2, 0.1, 5.0], [-0.05, 0.9, 2.0], [1e-3, -2e-3, 1.0]])
    rect = np.array([[0.0, 0], [100, 0], [100, 60], [0, 60]])
    ones = np.ones((4, 1))
    warped = np.hstack([rect, ones]) @ H0.T
    warped = warped[:, :2] / warped[:, 2:3]
    quad = pc.QuadFeature("a", pc._canonical_quad(warped))
    # match target corner order to the canonicalized source order
    order = [int(np.argmin(np.linalg.norm(warped - v, axis=1)))
             for v in quad.vertices]
    H = pc.fit_homography(quad, rect[order])
    assert np.max(np.abs(H.apply(quad.vertices) - rect[order])) <= 1e-6


def test_homography_random_quads_residual():
    rng = np.random.default_rng(3)
    n = 0
    while n < 30:
        base = _unit_square() * 80 + 20
        quad_pts = base + rng.normal(scale=8.0, size=(4, 2))
        v = pc._canonical_quad(quad_pts)
        if pc.polygon_area(v) <= 0 or not pc._is_convex(v):
            continue
        angles = []
        for i in range(4):
            a, b, c = v[i - 1], v[i], v[(i + 1) % 4]
            u1, u2 = a - b, c - b
            cosang = np.dot(u1, u2) / (np.linalg.norm(u1) * np.linalg.norm(u2))
            angles.append(math.degrees(math.acos(np.clip(cosang, -1, 1))))
        if min(angles) <= 10.0:
            continue
        quad = pc.QuadFeature("a", v)
        rect = np.array([[0.0, 0], [50, 0], [50, 30], [0, 30]])
        H = pc.fit_homography(quad, rect)
        assert np.max(np.abs(H.apply(v) - rect)) <= 1e-6
        n += 1


def test_homography_collinear_vertices():
    v = np.array([[0.0, 0], [5, 0], [10, 0.0000001], [0, 10]])
    quad = pc.QuadFeature("a", pc._canonical_quad(v))
    with pytest.raises(ConditioningError):
        pc.fit_homography(quad, _unit_square())


def test_unwarp_identity():
    img = _rect_image([(50, 40, 150, 120)])
    out = pc.unwarp(img, pc.Homography(np.eye(3)), (img.width, img.height))
    inner = np.s_[1:-1, 1:-1]
    assert np.array_equal(out.data[inner], img.data[inner])


def test_unwarp_translation():
    img = _rect_image([(50, 40, 150, 120)])
    T = np.array([[1.0, 0, 5], [0, 1, 0], [0, 0, 1]])
    out = pc.unwarp(img, pc.Homography(T), (img.width, img.height))
    assert np.array_equal(out.data[40:119, 56:148], img.data[40:119, 51:143])


# ---------------------------------------------------------------------------
# Difference images


def test_difference_identical_is_zero(params):
    img = pc.synth_render(params, fg.FingerConfig(0, 0, 0))
    quads = pc.extract_pad_quads(img)
    diff, report = pc.difference_image(img, img, pad_quads=quads)
    assert not diff.any()
    assert not any(report.contact.values())


def test_difference_drift_robust(params):
    ref = pc.synth_render(params, fg.FingerConfig(0, 10, 10))
    quads = pc.extract_pad_quads(ref)
    drifted = pc.RasterImage(
        np.clip(ref.data.astype(int) + 2, 0, 255).astype(np.uint8))
    _, report = pc.difference_image(drifted, ref, pad_quads=quads)
    assert not any(report.contact.values())


def test_difference_flags_imprinted_pad(params):
    cfg = fg.FingerConfig(0, 20, 20)
    ref = pc.synth_render(params, cfg)
    quads = pc.extract_pad_quads(ref)
    cur = pc.synth_render(params, cfg,
                          imprints=[("intermediate", 0.5, 4.0, 50)])
    _, report = pc.difference_image(cur, ref, pad_quads=quads)
    assert report.contact["intermediate"]
    assert not report.contact["proximal"]
    assert not report.contact["distal"]
    assert report.mean_abs_delta["intermediate"] > 0.0


def test_difference_dimension_mismatch():
    with pytest.raises(DomainError):
        pc.difference_image(_blank(100, 100), _blank(100, 101))


# ---------------------------------------------------------------------------
# Synthetic renderer


def test_straight_render_three_components(params):
    img = pc.synth_render(params, fg.FingerConfig(0, 0, 0))
    assert (img.width, img.height) == (1440, 1080)
    cs = pc.extract_contours(pc.threshold_global(img))
    assert len(cs) == 3


def test_zero_depth_imprint_is_noop(params):
    cfg = fg.FingerConfig(0, 30, 30)
    a = pc.synth_render(params, cfg)
    b = pc.synth_render(params, cfg, imprints=[("distal", 0.5, 3.0, 0)])
    assert np.array_equal(a.data, b.data)


def test_render_rejects_bad_imprints(params):
    cfg = fg.FingerConfig(0, 0, 0)
    with pytest.raises(DomainError):
        pc.synth_render(params, cfg, imprints=[("thumb", 0.5, 3.0, 50)])
    with pytest.raises(DomainError):
        pc.synth_render(params, cfg, imprints=[("distal", 1.5, 3.0, 50)])
    with pytest.raises(DomainError):
        pc.synth_render(params, cfg, imprints=[("distal", 0.5, -1.0, 50)])
    with pytest.raises(DomainError):
        pc.synth_render(params, cfg, imprints=[("distal", 0.5, 3.0, 400)])


def test_render_rejects_infeasible_config(params):
    with pytest.raises(DomainError):
        pc.synth_render(params, fg.FingerConfig(0, 95, 0))


def test_render_deterministic(params):
    cfg = fg.FingerConfig(0, 42, 17)
    a = pc.synth_render(params, cfg)
    b = pc.synth_render(params, cfg)
    assert np.array_equal(a.data, b.data)


def test_unwarped_imprint_roughly_circular(params):
    # Rectification assumes a locally projective view, so use a distant
    # direct-view camera: the pad then spans a small angle and the
    # equiangular-pixel distortion is negligible.
    tpl = op.SceneTemplate(camera_offset=(11.5, -150.0),
                           camera_boresight_deg=90.0, mirrors=())
    cfg = fg.FingerConfig(0, 0, 0)
    ref = pc.synth_render(params, cfg, template=tpl)
    cur = pc.synth_render(params, cfg, template=tpl,
                          imprints=[("intermediate", 0.5, 5.0, 120)])
    quad = pc.extract_pad_quads(ref)["intermediate"]
    # 23 x 24 mm pad: pick the rect with the same physical aspect
    rect = np.array([[0.0, 0], [400, 0], [400, 417], [0, 417]])
    H = pc.fit_homography(quad, rect)
    flat = pc.unwarp(cur, H, (400, 417))
    # crop the border: resampling blends pad and background levels there
    inner = flat.data[4:-4, 4:-4]
    blob = (inner < pc.PAD_BASE_INTENSITY - 60) & (inner > 0)
    ys, xs = np.nonzero(blob)
    assert len(xs) > 50
    wx = xs.max() - xs.min() + 1
    wy = ys.max() - ys.min() + 1
    assert abs(wx - wy) / max(wx, wy) <= 0.10


# ---------------------------------------------------------------------------
# Feature pipeline properties


def test_pipeline_determinism(params):
    img = pc.synth_render(params, fg.FingerConfig(0, 33, 57))
    a = pc.extract_pad_quads(img)
    b = pc.extract_pad_quads(img)
    for n in a:
        assert np.array_equal(a[n].vertices, b[n].vertices)


def test_equivariance_under_translation():
    rects = [(30, 60, 120, 150), (160, 50, 260, 160), (290, 70, 370, 140)]
    img = _rect_image(rects, h=220, w=420)
    base = pc.extract_quads(img)
    shifted = pc.RasterImage(np.roll(np.roll(img.data, 5, axis=0), 7, axis=1))
    moved = pc.extract_quads(shifted)
    assert len(base) == len(moved) == 3
    for q0, q1 in zip(base, moved):
        assert np.array_equal(q1.vertices, q0.vertices + (7.0, 5.0))


# ---------------------------------------------------------------------------
# Calibration and estimation


def test_table_validation():
    with pytest.raises(ValidationError):
        pc.CalibrationTable((0.0,), (0.0, 1.0), np.zeros((1, 2, 24)))
    bad = np.zeros((2, 2, 24))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValidationError):
        pc.CalibrationTable((0.0, 1.0), (0.0, 1.0), bad)


def test_two_by_two_grid(params):
    table = pc.build_calibration(params, (0.0, 30.0), (0.0, 30.0))
    assert table.vectors.shape == (2, 2, 24)
    assert table.failures == ()


def test_calibration_aborts_on_many_failures(params):
    with pytest.raises((ConditioningError, DomainError)):
        pc.build_calibration(params, (0.0, 92.0, 94.0, 96.0), (0.0, 30.0))


def test_estimate_exact_at_grid_point(params):
    table = pc.build_calibration(params, (0.0, 15.0, 30.0), (0.0, 15.0, 30.0))
    img = pc.synth_render(params, fg.FingerConfig(0, 15.0, 30.0))
    est = pc.estimate_joint_angles(table, img)
    assert est.pip_deg == pytest.approx(15.0, abs=1e-9)
    assert est.dip_deg == pytest.approx(30.0, abs=1e-9)
    assert est.residual_px <= 1e-9


def test_estimate_midpoint_within_spacing(params):
    table = pc.build_calibration(params, (10.0, 20.0, 30.0),
                                 (10.0, 20.0, 30.0))
    img = pc.synth_render(params, fg.FingerConfig(0, 15.0, 25.0))
    est = pc.estimate_joint_angles(table, img)
    assert abs(est.pip_deg - 15.0) <= 10.0
    assert abs(est.dip_deg - 25.0) <= 10.0


def test_table_injective_over_grid(params):
    vals = tuple(np.arange(0.0, 90.1, 15.0))
    table = pc.build_calibration(params, vals, vals)
    flat = table.vectors.reshape(-1, 24)
    for i in range(len(flat)):
        d = np.max(np.abs(flat[i + 1:] - flat[i]), axis=1)
        if d.size:
            assert d.min() > 0.5


def test_rmse_with_vertex_noise(params):
    vals = tuple(np.arange(0.0, 90.1, 6.0))
    table = pc.build_calibration(params, vals, vals)
    rng = np.random.default_rng(11)
    errs = []
    for _ in range(40):
        pip = float(rng.uniform(0, 90))
        dip = float(rng.uniform(0, 90))
        img = pc.synth_render(params, fg.FingerConfig(0, pip, dip))
        vec = pc.features_to_vector(pc.extract_pad_quads(img))
        noisy = vec + rng.normal(scale=1.0, size=vec.shape)
        est = pc.lookup_angles(table, noisy)
        errs.append((est.pip_deg - pip, est.dip_deg - dip))
    errs = np.array(errs)
    rmse = np.sqrt(np.mean(errs ** 2, axis=0))
    assert rmse[0] <= 2.3
    assert rmse[1] <= 2.1


def test_occluded_pad_estimate(params):
    table = pc.build_calibration(params, (0.0, 15.0, 30.0), (0.0, 15.0, 30.0))
    cfg = fg.FingerConfig(0, 15.0, 15.0)
    img = pc.synth_render(params, cfg)
    full = pc.estimate_joint_angles(table, img)
    quads = pc.extract_pad_quads(img)
    erased = img.data.copy()
    v = quads["distal"].vertices
    x0 = max(int(v[:, 0].min()) - 2, 0)
    erased[:, x0:] = 0
    partial = pc.estimate_joint_angles(table, pc.RasterImage(erased))
    assert partial.confidence < full.confidence
    assert abs(partial.pip_deg - 15.0) <= 15.0


def test_estimate_requires_two_quads(params):
    with pytest.raises(FeatureExtractionError):
        table = pc.build_calibration(params, (0.0, 15.0), (0.0, 15.0))
        pc.estimate_joint_angles(table, _blank())
