"""Tactile-image interpretation: frames to features to joint angles.

The pipeline runs threshold -> contours -> convex hulls -> four-corner
polygon approximation -> homography unwarp, and a calibration table maps
stacked quad vertices back to joint angles.  Images are grayscale uint8
arrays indexed [row, column]; feature coordinates are (x, y) pixels with
x along columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, spatial

from . import finger as fg
from . import geometry as geo
from . import optics as op
from .errors import (ConditioningError, DomainError, FeatureExtractionError,
                     ValidationError)

DEFAULT_THRESHOLD = 100
MIN_BLOB_AREA = 500
CONTACT_DELTA = 8
CONTACT_PIXEL_FRACTION = 0.01
PAD_BASE_INTENSITY = 200


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class RasterImage:
    data: np.ndarray          # uint8, shape (height, width)

    def __post_init__(self):
        a = self.data
        if a.ndim != 2 or a.size == 0:
            raise ValidationError("image must be a nonempty 2-d array")
        if a.dtype != np.uint8:
            raise ValidationError("image data must be uint8")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class QuadFeature:
    pad_id: str
    vertices: np.ndarray      # (4, 2) float, CCW, canonical start corner

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.shape != (4, 2):
            raise ValidationError("quad needs exactly 4 vertices")
        if polygon_area(v) <= 0.0:
            raise ValidationError("quad vertices must wind counterclockwise")
        if not _is_convex(v):
            raise ValidationError("quad must be convex")


@dataclass(frozen=True)
class Homography:
    matrix: np.ndarray        # 3x3, normalized so matrix[2, 2] == 1

    def __post_init__(self):
        m = np.asarray(self.matrix, float)
        if m.shape != (3, 3):
            raise ValidationError("homography must be 3x3")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ConditioningError("homography is singular")

    def apply(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, float)
        ones = np.ones((p.shape[0], 1))
        q = np.hstack([p, ones]) @ self.matrix.T
        return q[:, :2] / q[:, 2:3]


@dataclass(frozen=True)
class ContactReport:
    contact: dict[str, bool]
    imprint_masks: dict[str, np.ndarray]
    mean_abs_delta: dict[str, float]


@dataclass(frozen=True)
class CalibrationTable:
    pip_values: tuple[float, ...]      # sorted grid axes, degrees
    dip_values: tuple[float, ...]
    vectors: np.ndarray                # (n_pip, n_dip, 24) stacked vertices
    failures: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if len(self.pip_values) < 2 or len(self.dip_values) < 2:
            raise ValidationError("calibration needs >=2 samples per axis")
        if not np.all(np.isfinite(self.vectors)):
            raise ValidationError("calibration vectors must be finite")


# ---------------------------------------------------------------------------
# Geometry helpers on pixel polygons


def polygon_area(points: np.ndarray) -> float:
    p = np.asarray(points, float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _is_convex(v: np.ndarray) -> bool:
    n = len(v)
    sign = 0.0
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        cr = geo.cross2(b - a, c - b)
        if abs(cr) < 1e-12:
            continue
        if sign == 0.0:
            sign = cr
        elif cr * sign < 0.0:
            return False
    return True


def _canonical_quad(v: np.ndarray) -> np.ndarray:
    """CCW winding, starting at the topmost (then leftmost) vertex."""
    v = np.asarray(v, float)
    if polygon_area(v) < 0.0:
        v = v[::-1]
    start = min(range(len(v)), key=lambda i: (v[i][1], v[i][0]))
    return np.roll(v, -start, axis=0)


# ---------------------------------------------------------------------------
# Thresholding and contours


def threshold_global(img: RasterImage, level: int = DEFAULT_THRESHOLD):
    if not 0 <= level <= 255:
        raise DomainError(f"threshold level {level} outside [0, 255]")
    return img.data >= level


_MOORE = ((1, 0), (1, -1), (0, -1), (-1, -1),
          (-1, 0), (-1, 1), (0, 1), (1, 1))   # (dx, dy), clockwise from +x


def _trace_boundary(mask: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    """Moore-neighbor boundary trace from the component's top-left pixel.

    Terminates on Jacob's criterion: back at the start pixel with the
    same outgoing move as the first one.
    """
    h, w = mask.shape

    def step(x, y, back):
        # scan the 8 neighbors starting just past the backtrack direction
        for k in range(1, 9):
            d = (back + k) % 8
            dx, dy = _MOORE[d]
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and mask[ny, nx]:
                return nx, ny, d
        return None

    x0, y0 = start
    # start is topmost-then-leftmost, so its left neighbor is background
    first = step(x0, y0, 4)
    if first is None:
        return np.array([(x0, y0)], float)
    contour = [(x0, y0)]
    x, y, d = first
    while True:
        nxt = step(x, y, (d + 4) % 8)
        if (x, y) == (x0, y0) and nxt == first:
            break
        contour.append((x, y))
        x, y, d = nxt
    return np.array(contour, float)


def extract_contours(mask: np.ndarray,
                     min_area: int = MIN_BLOB_AREA) -> list[np.ndarray]:
    """Outer boundary of each 4-connected component with enough area.

    Contours are (N, 2) arrays of (x, y) pixel coordinates wound
    counterclockwise in image axes (x right, y down on screen).
    4-connectivity keeps diagonally touching speckle from merging into
    one large blob that would defeat the small-blob rejection.
    """
    labels, n = ndimage.label(mask)
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    contours = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        if areas[i] < min_area:
            continue
        comp = labels[sl] == i
        ys, xs = np.nonzero(comp)
        k = np.lexsort((xs, ys))[0]          # topmost, then leftmost
        c = _trace_boundary(comp, (int(xs[k]), int(ys[k])))
        c += (sl[1].start, sl[0].start)
        if len(c) >= 3 and polygon_area(c) < 0.0:
            c = c[::-1]
        contours.append(c)
    return contours


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull vertices, counterclockwise, collinear points dropped."""
    p = np.unique(np.asarray(points, float), axis=0)
    if len(p) < 3:
        raise FeatureExtractionError("hull needs at least 3 distinct points")
    try:
        hull = spatial.ConvexHull(p)
    except spatial.QhullError:
        raise FeatureExtractionError("points are collinear: degenerate hull")
    return p[hull.vertices]


# ---------------------------------------------------------------------------
# Polygon approximation


def _rdp(points: np.ndarray, eps: float) -> list[int]:
    """Indices kept by Ramer-Douglas-Peucker on an open chain."""
    keep = [0, len(points) - 1]

    def recurse(i, j):
        if j <= i + 1:
            return
        a, b = points[i], points[j]
        d = np.array([geo.point_segment_distance(points[k], a, b)
                      for k in range(i + 1, j)])
        k = int(np.argmax(d)) + i + 1
        if d[k - i - 1] > eps:
            recurse(i, k)
            keep.append(k)
            recurse(k, j)

    recurse(0, len(points) - 1)
    return sorted(set(keep))


def _rdp_closed(loop: np.ndarray, eps: float) -> np.ndarray:
    """RDP on a closed loop, split at the two mutually farthest-x points."""
    i0 = int(np.argmin(loop[:, 0] + 1e-6 * loop[:, 1]))
    rolled = np.roll(loop, -i0, axis=0)
    d = np.linalg.norm(rolled - rolled[0], axis=1)
    i1 = int(np.argmax(d))
    first = rolled[:i1 + 1]
    second = np.vstack([rolled[i1:], rolled[:1]])
    ka = _rdp(first, eps)
    kb = _rdp(second, eps)
    pts = [first[k] for k in ka[:-1]] + [second[k] for k in kb[:-1]]
    return np.array(pts)


QUAD_STABILITY = 0.08   # max fit error relative to sqrt(quad area)


def _quad_fit_error(points: np.ndarray, quad: np.ndarray) -> float:
    """Largest distance from any input point to the quad boundary."""
    worst = 0.0
    d = np.full(len(points), np.inf)
    for i in range(4):
        a, b = quad[i], quad[(i + 1) % 4]
        e = b - a
        L2 = float(e @ e)
        rel = points - a
        t = np.clip((rel @ e) / L2 if L2 > 0 else 0.0, 0.0, 1.0)
        proj = a + t[:, None] * e
        d = np.minimum(d, np.linalg.norm(points - proj, axis=1))
    worst = float(d.max())
    return worst


def approx_polygon(hull: np.ndarray, epsilon: float = 2.0,
                   pad_id: str = "") -> QuadFeature:
    """Simplify a hull to exactly four corners.

    If the given epsilon does not yield four vertices, the tolerance is
    searched over [0.5, 50] px; the pad views are projectively
    quadrilateral, so a four-corner simplification must exist.  Shapes
    whose best 4-gon leaves a large residual (circles, clipped blobs)
    are rejected as having no stable four-corner reduction.
    """
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    hull = np.asarray(hull, float)

    def count(e):
        return _rdp_closed(hull, e)

    v = count(epsilon)
    if len(v) != 4:
        lo, hi = 0.5, 50.0
        v_lo, v_hi = count(lo), count(hi)
        if len(v_lo) < 4 or len(v_hi) > 4:
            raise FeatureExtractionError(
                f"no epsilon in [{lo}, {hi}] px gives 4 vertices")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            v = count(mid)
            if len(v) > 4:
                lo = mid
            elif len(v) < 4:
                hi = mid
            else:
                break
        if len(v) != 4:
            raise FeatureExtractionError(
                f"no epsilon in [0.5, 50] px gives 4 vertices")
    quad = _canonical_quad(v)
    err = _quad_fit_error(hull, quad)
    scale = math.sqrt(abs(polygon_area(quad)))
    if scale <= 0.0 or err > QUAD_STABILITY * scale:
        raise FeatureExtractionError(
            f"4-corner fit residual {err:.1f} px is unstable for this shape")
    return QuadFeature(pad_id, quad)


# ---------------------------------------------------------------------------
# Homography and unwarp


def fit_homography(quad: QuadFeature, rect: np.ndarray) -> Homography:
    """Exact 4-point projective map from quad vertices to rect corners."""
    src = np.asarray(quad.vertices, float)
    dst = np.asarray(rect, float)
    if dst.shape != (4, 2):
        raise ValidationError("target must be 4 corner points")
    scale = float(np.max(np.abs(src)) + 1.0)
    for i in range(4):
        a, b, c = src[i], src[(i + 1) % 4], src[(i + 2) % 4]
        if abs(geo.cross2(b - a, c - a)) < 1e-6 * scale * scale:
            raise ConditioningError("three quad vertices are near-collinear")
    A = np.zeros((8, 8))
    rhs = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        A[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        A[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        rhs[2 * i], rhs[2 * i + 1] = u, v
    try:
        h = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise ConditioningError("degenerate correspondence for homography")
    H = Homography(np.append(h, 1.0).reshape(3, 3))
    residual = np.max(np.abs(H.apply(src) - dst))
    if residual > 1e-9:
        raise ConditioningError(f"homography residual {residual:.2e} px")
    return H


def unwarp(img: RasterImage, H: Homography,
           out_size: tuple[int, int]) -> RasterImage:
    """Inverse-mapped bilinear resampling; off-source pixels become 0."""
    w, h = out_size
    if w < 1 or h < 1:
        raise DomainError("output size must be positive")
    Hinv = np.linalg.inv(H.matrix)
    xs, ys = np.meshgrid(np.arange(w, dtype=float),
                         np.arange(h, dtype=float))
    q = np.stack([xs, ys, np.ones_like(xs)], axis=-1) @ Hinv.T
    sx = q[..., 0] / q[..., 2]
    sy = q[..., 1] / q[..., 2]
    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    fx, fy = sx - x0, sy - y0
    H_, W_ = img.data.shape
    valid = (x0 >= 0) & (x0 < W_ - 1) & (y0 >= 0) & (y0 < H_ - 1)
    x0c = np.clip(x0, 0, W_ - 2)
    y0c = np.clip(y0, 0, H_ - 2)
    d = img.data.astype(float)
    val = (d[y0c, x0c] * (1 - fx) * (1 - fy)
           + d[y0c, x0c + 1] * fx * (1 - fy)
           + d[y0c + 1, x0c] * (1 - fx) * fy
           + d[y0c + 1, x0c + 1] * fx * fy)
    out = np.where(valid, np.rint(val), 0.0).astype(np.uint8)
    return RasterImage(out)


# ---------------------------------------------------------------------------
# Differencing and contact


def _quad_mask(shape, quad: QuadFeature) -> np.ndarray:
    h, w = shape
    xs, ys = np.meshgrid(np.arange(w, dtype=float),
                         np.arange(h, dtype=float))
    inside = np.ones(shape, bool)
    v = quad.vertices
    for i in range(4):
        a, b = v[i], v[(i + 1) % 4]
        inside &= ((b[0] - a[0]) * (ys - a[1])
                   - (b[1] - a[1]) * (xs - a[0])) >= 0.0
    return inside


def difference_image(current: RasterImage, reference: RasterImage,
                     pad_quads: dict[str, QuadFeature] | None = None,
                     delta: int = CONTACT_DELTA,
                     pixel_fraction: float = CONTACT_PIXEL_FRACTION):
    """Signed difference plus per-pad contact classification.

    A pad is in contact when at least `pixel_fraction` of its pixels
    changed by `delta` intensity or more.  Pad regions come from
    `pad_quads`, or are extracted from the reference frame.
    """
    if current.data.shape != reference.data.shape:
        raise DomainError("image dimensions differ")
    diff = current.data.astype(np.int16) - reference.data.astype(np.int16)
    if pad_quads is None:
        pad_quads = extract_pad_quads(reference)
    contact, masks, means = {}, {}, {}
    for name, quad in pad_quads.items():
        region = _quad_mask(diff.shape, quad)
        changed = (np.abs(diff) >= delta) & region
        n = int(region.sum())
        contact[name] = n > 0 and changed.sum() >= pixel_fraction * n
        masks[name] = changed
        means[name] = float(np.abs(diff[region]).mean()) if n else 0.0
    return diff, ContactReport(contact, masks, means)


# ---------------------------------------------------------------------------
# Full-frame feature extraction


def extract_quads(img: RasterImage,
                  level: int = DEFAULT_THRESHOLD,
                  min_area: int = MIN_BLOB_AREA) -> list[QuadFeature]:
    """Pad quad candidates sorted left to right, unlabeled."""
    mask = threshold_global(img, level)
    contours = extract_contours(mask, min_area)
    quads = []
    for c in contours:
        try:
            hull = convex_hull(c)
            quads.append(approx_polygon(hull))
        except FeatureExtractionError:
            continue
    quads.sort(key=lambda q: float(q.vertices[:, 0].mean()))
    return quads


def extract_pad_quads(img: RasterImage,
                      level: int = DEFAULT_THRESHOLD,
                      min_area: int = MIN_BLOB_AREA) -> dict[str, QuadFeature]:
    """The three pad quads, labeled by horizontal image order.

    The optics layout images the pads side by side in a fixed order, so
    the left-to-right blob order identifies them.
    """
    quads = extract_quads(img, level, min_area)
    if len(quads) != 3:
        raise FeatureExtractionError(
            f"found {len(quads)} pad features, need exactly 3")
    names = _pad_order()
    return {names[i]: QuadFeature(names[i], quads[i].vertices)
            for i in range(3)}


def _pad_order() -> tuple[str, str, str]:
    """Left-to-right pad order in the image for the reference layout."""
    return ("proximal", "intermediate", "distal")


# ---------------------------------------------------------------------------
# Synthetic tactile frames


RENDER_HEIGHT = 1080
_RUN_TRIM = 2       # columns erased at run ends so blobs never touch


def _longest_run(mask: np.ndarray) -> tuple[int, int] | None:
    """(start, end) inclusive of the longest run of True, or None."""
    if not mask.any():
        return None
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, ends = edges[::2], edges[1::2] - 1
    k = int(np.argmax(ends - starts))
    return int(starts[k]), int(ends[k])


def _check_imprint(imp) -> tuple[str, float, float, int]:
    pad, center, radius, depth = imp
    if pad not in op.PAD_NAMES:
        raise DomainError(f"unknown pad {pad!r}")
    if not 0.0 <= center <= 1.0:
        raise DomainError("imprint center must lie in [0, 1] along the pad")
    if radius <= 0.0:
        raise DomainError("imprint radius must be positive")
    if not 0 <= depth <= 255:
        raise DomainError("imprint depth outside [0, 255]")
    return str(pad), float(center), float(radius), int(depth)


def synth_render(params: fg.FingerParams, config: fg.FingerConfig,
                 imprints=(), template: op.SceneTemplate | None = None,
                 height: int = RENDER_HEIGHT) -> RasterImage:
    """Synthetic camera frame of the pad backs for one finger pose.

    Background is 0; each pad paints its longest visible pixel run at
    base intensity, with vertical extent set by the pad's lateral width
    scaled by 1/path-length (lateral magnification).  Imprints appear as
    darkened circular blobs in pad-surface coordinates.
    """
    if height < 8:
        raise DomainError("render height too small")
    imprints = [_check_imprint(i) for i in imprints]
    if template is None:
        template = op.REFERENCE_TEMPLATE
    scene = op.build_scene(params, template, config)
    cam = scene.camera
    w = cam.pixels
    centers = np.array([cam.pixel_angle(i + 0.5) for i in range(w)])
    term, pad_ix, t_hit, plen = op._trace_batch(scene, centers)
    img = np.zeros((height, w), np.uint8)
    px_per_rad = w / math.radians(cam.fov_deg)
    half_w = params.pad_width / 2.0
    cy = (height - 1) / 2.0
    rows = np.arange(height, dtype=float)[:, None]
    for p, name in enumerate(op.PAD_NAMES):
        run = _longest_run((term == 0) & (pad_ix == p))
        if run is None:
            continue
        c0, c1 = run[0] + _RUN_TRIM, run[1] - _RUN_TRIM
        if c1 - c0 < 2:
            continue
        cols = np.arange(c0, c1 + 1)
        # magnification sampled at the run ends and interpolated linearly
        # so the drawn region is a true quadrilateral (straight edges);
        # the endpoint cap keeps the quad from clipping at the frame edge
        cap = cy - 6.0
        h0 = min(half_w * px_per_rad / plen[c0], cap)
        h1 = min(half_w * px_per_rad / plen[c1], cap)
        half_px = np.linspace(h0, h1, cols.size)
        inside = np.abs(rows - cy) <= half_px[None, :]
        block = np.where(inside, PAD_BASE_INTENSITY, 0).astype(np.uint8)
        pad = scene.pads[name]
        pad_len = float(np.linalg.norm(np.asarray(pad.p1) -
                                       np.asarray(pad.p0)))
        s_mm = t_hit[cols] * pad_len
        for ipad, center, radius, depth in imprints:
            if ipad != name or depth == 0:
                continue
            dx = s_mm - center * pad_len
            chord = radius * radius - dx * dx
            chord_px = np.sqrt(np.maximum(chord, 0.0)) * px_per_rad / plen[cols]
            dark = inside & (np.abs(rows - cy) <= chord_px[None, :]) \
                & (chord > 0.0)[None, :]
            block = np.where(dark,
                             np.maximum(block.astype(int) - depth, 0),
                             block).astype(np.uint8)
        img[:, cols] = block
    # mirror the frame so the pads read proximal -> distal left to right
    return RasterImage(np.ascontiguousarray(img[:, ::-1]))


# ---------------------------------------------------------------------------
# Calibration and joint-angle lookup


@dataclass(frozen=True)
class JointEstimate:
    pip_deg: float
    dip_deg: float
    confidence: float
    residual_px: float


def features_to_vector(quads: dict[str, QuadFeature]) -> np.ndarray:
    """Stacked vertex vector in fixed pad order: (24,) floats."""
    if set(quads) != set(op.PAD_NAMES):
        raise DomainError("need one quad per pad")
    return np.concatenate([quads[n].vertices.ravel() for n in _pad_order()])


def _quad_rolls(vec: np.ndarray) -> np.ndarray:
    """All cyclic vertex shifts per quad: (4, nquads*8) candidates."""
    q = vec.reshape(-1, 4, 2)
    return np.stack([np.roll(q, -s, axis=1).reshape(vec.shape)
                     for s in range(4)])


def _aligned_sq_dist(table_vecs: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Per-cell squared distance, minimizing over cyclic shifts per quad.

    The canonical start corner can flip between near-tied vertices; the
    shift minimization makes the lookup robust to that.
    """
    nq = vec.size // 8
    tq = table_vecs.reshape(table_vecs.shape[:-1] + (nq, 4, 2))
    rolls = _quad_rolls(vec).reshape(4, nq, 4, 2)
    # (..., nq, 4shifts): squared distance of each quad to each shift
    d = np.sum((tq[..., None, :, :] - rolls.transpose(1, 0, 2, 3)) ** 2,
               axis=(-1, -2))
    return np.sum(np.min(d, axis=-1), axis=-1)


def _align_to(ref: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Cyclically shift each quad of `vec` to best match `ref`."""
    nq = vec.size // 8
    rolls = _quad_rolls(vec)
    out = np.empty_like(vec)
    for q in range(nq):
        sl = slice(8 * q, 8 * q + 8)
        d = np.sum((rolls[:, sl] - ref[sl]) ** 2, axis=1)
        out[sl] = rolls[int(np.argmin(d)), sl]
    return out


def build_calibration(params: fg.FingerParams,
                      pip_values, dip_values,
                      template: op.SceneTemplate | None = None,
                      height: int = RENDER_HEIGHT,
                      progress=None) -> CalibrationTable:
    """Render the joint grid without imprints and tabulate quad vectors.

    Grid points where feature extraction fails are recorded and their
    vectors filled from the nearest working neighbor; more than 5%
    failures aborts the calibration.
    """
    pips = tuple(float(x) for x in pip_values)
    dips = tuple(float(x) for x in dip_values)
    if sorted(pips) != list(pips) or sorted(dips) != list(dips):
        raise DomainError("grid axes must be sorted ascending")
    vectors = np.zeros((len(pips), len(dips), 24))
    ok = np.zeros((len(pips), len(dips)), bool)
    failures = []
    for i, pip in enumerate(pips):
        for j, dip in enumerate(dips):
            try:
                img = synth_render(params, fg.FingerConfig(0.0, pip, dip),
                                   template=template, height=height)
                vectors[i, j] = features_to_vector(extract_pad_quads(img))
                ok[i, j] = True
            except (FeatureExtractionError, DomainError):
                failures.append((pip, dip))
            if progress is not None:
                progress(i * len(dips) + j + 1, len(pips) * len(dips))
    n_total = len(pips) * len(dips)
    if len(failures) > 0.05 * n_total:
        raise ConditioningError(
            f"feature extraction failed at {len(failures)} of {n_total} "
            f"grid points")
    if failures:
        good = np.argwhere(ok)
        for i, j in np.argwhere(~ok):
            k = int(np.argmin(np.abs(good[:, 0] - i) +
                              np.abs(good[:, 1] - j)))
            vectors[i, j] = vectors[good[k, 0], good[k, 1]]
    return CalibrationTable(pips, dips, vectors, tuple(failures))


def _failure_mask(table: CalibrationTable) -> np.ndarray:
    bad = np.zeros((len(table.pip_values), len(table.dip_values)), bool)
    for pip, dip in table.failures:
        i = int(np.argmin(np.abs(np.array(table.pip_values) - pip)))
        j = int(np.argmin(np.abs(np.array(table.dip_values) - dip)))
        bad[i, j] = True
    return bad


def lookup_angles(table: CalibrationTable, vector: np.ndarray,
                  slots: tuple[int, ...] = (0, 1, 2)) -> JointEstimate:
    """Nearest grid cell plus local linear refinement over that cell.

    `slots` selects which pads the vector covers (indices into the fixed
    pad order) so a partially occluded frame can still be matched.
    """
    vector = np.asarray(vector, float)
    if len(slots) < 2 or sorted(set(slots)) != sorted(slots):
        raise DomainError("need at least 2 distinct pad slots")
    if vector.shape != (8 * len(slots),):
        raise DomainError(f"vector length {vector.size} does not match "
                          f"{len(slots)} pads")
    cols = np.concatenate([np.arange(8 * s, 8 * s + 8) for s in slots])
    sub = table.vectors[:, :, cols]
    d2 = _aligned_sq_dist(sub, vector)
    d2[_failure_mask(table)] = np.inf
    i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
    pips = np.asarray(table.pip_values)
    dips = np.asarray(table.dip_values)
    v0 = sub[i, j]
    cand = _align_to(v0, vector)

    def diff(axis, k):
        if axis == 0:
            lo, hi = max(k - 1, 0), min(k + 1, len(pips) - 1)
            dv = _align_to(v0, sub[hi, j]) - _align_to(v0, sub[lo, j])
            return dv / (pips[hi] - pips[lo])
        lo, hi = max(k - 1, 0), min(k + 1, len(dips) - 1)
        dv = _align_to(v0, sub[i, hi]) - _align_to(v0, sub[i, lo])
        return dv / (dips[hi] - dips[lo])

    J = np.stack([diff(0, i), diff(1, j)], axis=1)
    rhs = cand - v0
    delta, *_ = np.linalg.lstsq(J, rhs, rcond=None)
    step_p = float(np.max(np.diff(pips))) if len(pips) > 1 else 0.0
    step_d = float(np.max(np.diff(dips))) if len(dips) > 1 else 0.0
    delta[0] = float(np.clip(delta[0], -step_p, step_p))
    delta[1] = float(np.clip(delta[1], -step_d, step_d))
    residual = rhs - J @ delta
    rms = float(np.sqrt(np.mean(residual ** 2)))
    confidence = (len(slots) / 3.0) / (1.0 + rms)
    return JointEstimate(pip_deg=float(pips[i] + delta[0]),
                         dip_deg=float(dips[j] + delta[1]),
                         confidence=confidence, residual_px=rms)


def estimate_joint_angles(table: CalibrationTable,
                          img: RasterImage) -> JointEstimate:
    """Joint angles from a frame via the feature pipeline and the table.

    With all three pads visible the full stacked vector is matched.  If
    one pad is occluded the two visible quads are tried against every
    order-preserving pad assignment and the best match wins, with
    confidence scaled down accordingly.
    """
    quads = extract_quads(img)
    if len(quads) < 2:
        raise FeatureExtractionError(
            f"only {len(quads)} pad features visible, need at least 2")
    if len(quads) > 3:
        raise FeatureExtractionError(f"{len(quads)} pad candidates found")
    if len(quads) == 3:
        vec = np.concatenate([q.vertices.ravel() for q in quads])
        return lookup_angles(table, vec, slots=(0, 1, 2))
    vec = np.concatenate([q.vertices.ravel() for q in quads])
    best = None
    for slots in ((0, 1), (0, 2), (1, 2)):
        est = lookup_angles(table, vec, slots=slots)
        if best is None or est.residual_px < best.residual_px:
            best = est
    return best
