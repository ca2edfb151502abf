"""Planar reflection simulator.

A pinhole camera with uniform angular pixel spacing casts rays into a
scene of one-sided sensing pads, one-sided planar mirrors, and opaque
occluder segments.  Rays reflect specularly at mirror front faces (up to
MAX_BOUNCES) and terminate on a pad's sensing side, on any blocking
surface, or by escaping the scene.

Pads are visible only from their sensing side; a hit on the back of a
pad or mirror absorbs the ray.  All lengths in mm, angles in radians
unless a name says otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import finger as fg
from . import geometry as geo
from .errors import DomainError, ValidationError, VisibilityError

MAX_BOUNCES = 4
_EPS = 1e-9          # march offset against self-intersection
PAD_NAMES = ("proximal", "intermediate", "distal")


# ---------------------------------------------------------------------------
# Domain types


def _check_segment(p0: np.ndarray, p1: np.ndarray, normal: np.ndarray | None):
    if geo.norm(p1 - p0) < 1e-12:
        raise ValidationError("zero-length segment")
    if normal is not None:
        if abs(geo.norm(normal) - 1.0) > 1e-9:
            raise ValidationError("normal must be unit length")
        if abs(float(np.dot(normal, p1 - p0))) > 1e-6 * geo.norm(p1 - p0):
            raise ValidationError("normal must be perpendicular to the segment")


@dataclass(frozen=True)
class Mirror:
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray      # unit, pointing off the reflective face

    def __post_init__(self):
        _check_segment(self.p0, self.p1, self.normal)


@dataclass(frozen=True)
class Pad:
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray      # unit, pointing off the sensing face

    def __post_init__(self):
        _check_segment(self.p0, self.p1, self.normal)

    @property
    def length(self) -> float:
        return geo.norm(self.p1 - self.p0)


@dataclass(frozen=True)
class Camera2D:
    position: np.ndarray
    boresight: float            # radians, world
    fov_deg: float = 160.0
    pixels: int = 1440

    def __post_init__(self):
        if not 0.0 < self.fov_deg <= 180.0:
            raise ValidationError("fov must be in (0, 180] degrees")
        if self.pixels < 1:
            raise ValidationError("camera needs at least one pixel")

    def pixel_angle(self, pixel: float) -> float:
        """World ray angle for a (possibly fractional) pixel coordinate."""
        half = math.radians(self.fov_deg) / 2.0
        frac = pixel / self.pixels
        return self.boresight - half + frac * math.radians(self.fov_deg)


@dataclass(frozen=True)
class OpticsScene:
    pads: dict[str, Pad]
    mirrors: tuple[Mirror, ...]
    occluders: tuple[tuple[np.ndarray, np.ndarray], ...]
    camera: Camera2D

    def __post_init__(self):
        if set(self.pads) != set(PAD_NAMES):
            raise ValidationError(
                f"scene needs exactly the pads {PAD_NAMES}, got {sorted(self.pads)}")


@dataclass(frozen=True)
class RayPath:
    vertices: tuple[np.ndarray, ...]
    terminal: str               # pad | occluded | escaped
    pad_id: str | None
    t: float | None             # arclength parameter on the hit pad
    bounces: int
    path_length: float


@dataclass(frozen=True)
class VisibilityReport:
    fractions: dict[str, float]
    intervals: dict[str, tuple[tuple[float, float], ...]]
    terminals: tuple[tuple[str, str | None, float | None], ...]  # per pixel


# ---------------------------------------------------------------------------
# Core tracing

reflect = geo.reflect     # the reflection law lives in the geometry kit


def _segment_arrays(scene: OpticsScene):
    """Stack all scene segments: pads first, then mirrors, then occluders."""
    a, b, n, kind = [], [], [], []
    for i, name in enumerate(PAD_NAMES):
        pad = scene.pads[name]
        a.append(pad.p0); b.append(pad.p1); n.append(pad.normal); kind.append(0)
    for m in scene.mirrors:
        a.append(m.p0); b.append(m.p1); n.append(m.normal); kind.append(1)
    for (p0, p1) in scene.occluders:
        a.append(np.asarray(p0, float)); b.append(np.asarray(p1, float))
        n.append(geo.vec(0, 0)); kind.append(2)
    return (np.array(a, float), np.array(b, float),
            np.array(n, float), np.array(kind, int))


def _trace_batch(scene: OpticsScene, angles: np.ndarray):
    """Trace many rays at once.

    Returns (terminal codes, pad index, t, path length) per ray, with
    terminal codes 0=pad, 1=occluded, 2=escaped.
    """
    A, B, N, kind = _segment_arrays(scene)
    E = B - A                                   # (K,2)
    m = len(angles)
    origin = np.tile(np.asarray(scene.camera.position, float), (m, 1))
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    term = np.full(m, -1, int)
    pad_ix = np.full(m, -1, int)
    t_hit = np.full(m, np.nan)
    plen = np.zeros(m)
    active = np.ones(m, bool)

    for _ in range(MAX_BOUNCES + 1):
        if not active.any():
            break
        o = origin[active]                      # (M,2)
        dd = d[active]
        # ray o + s*dd vs segment A + u*E: solve with 2x2 cross products
        denom = dd[:, None, 0] * E[None, :, 1] - dd[:, None, 1] * E[None, :, 0]
        ao = A[None, :, :] - o[:, None, :]      # (M,K,2)
        s = (ao[:, :, 0] * E[None, :, 1] - ao[:, :, 1] * E[None, :, 0])
        u = (ao[:, :, 0] * dd[:, None, 1] - ao[:, :, 1] * dd[:, None, 0])
        with np.errstate(divide="ignore", invalid="ignore"):
            s = s / denom
            u = u / denom
        ok = (np.abs(denom) > 1e-14) & (s > _EPS) & (u >= -1e-9) & (u <= 1.0 + 1e-9)
        u = np.clip(u, 0.0, 1.0)
        s = np.where(ok, s, np.inf)
        nearest = np.argmin(s, axis=1)
        s_near = s[np.arange(len(s)), nearest]
        escaped = ~np.isfinite(s_near)

        idx_all = np.flatnonzero(active)
        term[idx_all[escaped]] = 2
        active[idx_all[escaped]] = False

        live = ~escaped
        rows = np.flatnonzero(live)
        if rows.size == 0:
            continue
        gi = idx_all[rows]                      # global ray indices
        seg = nearest[rows]
        sl = s_near[rows]
        hits = o[rows] + sl[:, None] * dd[rows]
        plen[gi] += sl
        facing = np.einsum("ij,ij->i", d[gi], N[seg]) < 0.0
        is_pad = kind[seg] == 0
        is_mirror = kind[seg] == 1

        # pad sensing side: terminal hit; anything else opaque stops the ray
        pad_rows = is_pad & facing
        g = gi[pad_rows]
        term[g] = 0
        pad_ix[g] = seg[pad_rows]
        uu = u[rows, nearest[rows]]
        t_hit[g] = uu[pad_rows]
        active[g] = False

        absorb = ~pad_rows & ~(is_mirror & facing)
        term[gi[absorb]] = 1
        active[gi[absorb]] = False

        bounce = is_mirror & facing
        g = gi[bounce]
        if g.size:
            nrm = N[seg[bounce]]
            dv = d[g]
            d[g] = dv - 2.0 * np.einsum("ij,ij->i", dv, nrm)[:, None] * nrm
            origin[g] = hits[bounce]
    # rays still flying after the bounce budget are absorbed
    term[active] = 1
    return term, pad_ix, t_hit, plen


def trace_ray(scene: OpticsScene, pixel: int) -> RayPath:
    """Path of the ray through one pixel center, with bounce vertices."""
    cam = scene.camera
    if not 0 <= pixel < cam.pixels:
        raise DomainError(f"pixel {pixel} outside [0, {cam.pixels})")
    A, B, N, kind = _segment_arrays(scene)
    E = B - A
    o = np.asarray(cam.position, float)
    ang = cam.pixel_angle(pixel + 0.5)
    d = geo.vec(math.cos(ang), math.sin(ang))
    verts = [o.copy()]
    plen = 0.0
    bounces = 0
    for _ in range(MAX_BOUNCES + 1):
        best_s, best_k, best_u = math.inf, -1, 0.0
        for k in range(len(A)):
            denom = geo.cross2(d, E[k])
            if abs(denom) < 1e-14:
                continue
            ao = A[k] - o
            s = geo.cross2(ao, E[k]) / denom
            u = geo.cross2(ao, d) / denom
            if s > _EPS and -1e-9 <= u <= 1.0 + 1e-9 and s < best_s:
                best_s, best_k, best_u = s, k, min(1.0, max(0.0, u))
        if best_k < 0:
            return RayPath(tuple(verts) + (o + 100.0 * d,), "escaped",
                           None, None, bounces, math.inf)
        hit = o + best_s * d
        verts.append(hit)
        plen += best_s
        facing = float(np.dot(d, N[best_k])) < 0.0
        if kind[best_k] == 0 and facing:
            return RayPath(tuple(verts), "pad", PAD_NAMES[best_k],
                           float(best_u), bounces, plen)
        if kind[best_k] == 1 and facing and bounces < MAX_BOUNCES:
            d = geo.reflect(d, N[best_k])
            o = hit
            bounces += 1
            continue
        return RayPath(tuple(verts), "occluded", None, None, bounces, plen)
    return RayPath(tuple(verts), "occluded", None, None, bounces, plen)


# ---------------------------------------------------------------------------
# Visibility and coverage


def visibility(scene: OpticsScene) -> VisibilityReport:
    """Trace every pixel; fractions from covered pad-arclength intervals.

    Intervals come from pixel-edge rays: a pixel whose two edge rays land
    on the same pad covers the arclength between the two landing points.
    """
    cam = scene.camera
    centers = np.array([cam.pixel_angle(i + 0.5) for i in range(cam.pixels)])
    edges = np.array([cam.pixel_angle(i) for i in range(cam.pixels + 1)])
    term_c, pad_c, t_c, _ = _trace_batch(scene, centers)
    term_e, pad_e, t_e, _ = _trace_batch(scene, edges)

    terminals = []
    for i in range(cam.pixels):
        if term_c[i] == 0:
            terminals.append(("pad", PAD_NAMES[pad_c[i]], float(t_c[i])))
        elif term_c[i] == 1:
            terminals.append(("occluded", None, None))
        else:
            terminals.append(("escaped", None, None))

    raw: dict[str, list[tuple[float, float]]] = {n: [] for n in PAD_NAMES}
    for i in range(cam.pixels):
        le, re = i, i + 1
        if term_e[le] == 0 and term_e[re] == 0 and pad_e[le] == pad_e[re]:
            t0, t1 = sorted((float(t_e[le]), float(t_e[re])))
            raw[PAD_NAMES[pad_e[le]]].append((t0, t1))
        elif term_c[i] == 0:
            # edge rays disagree (grazing / mirror boundary): count the
            # center hit as a degenerate sliver to keep the terminal map
            # and the interval set consistent
            name = PAD_NAMES[pad_c[i]]
            raw[name].append((float(t_c[i]), float(t_c[i])))

    intervals: dict[str, tuple[tuple[float, float], ...]] = {}
    fractions: dict[str, float] = {}
    for name in PAD_NAMES:
        merged: list[list[float]] = []
        for t0, t1 in sorted(raw[name]):
            if merged and t0 <= merged[-1][1] + 1e-12:
                merged[-1][1] = max(merged[-1][1], t1)
            else:
                merged.append([t0, t1])
        intervals[name] = tuple((a, b) for a, b in merged)
        fractions[name] = float(sum(b - a for a, b in merged))
    return VisibilityReport(fractions, intervals, tuple(terminals))


def project_pad(scene: OpticsScene, pad_id: str):
    """Per-pixel mapping (t, pixel, path length) for one pad."""
    if pad_id not in PAD_NAMES:
        raise ValidationError(f"unknown pad {pad_id!r}")
    cam = scene.camera
    centers = np.array([cam.pixel_angle(i + 0.5) for i in range(cam.pixels)])
    term, pad_ix, t, plen = _trace_batch(scene, centers)
    want = PAD_NAMES.index(pad_id)
    rows = np.flatnonzero((term == 0) & (pad_ix == want))
    if rows.size == 0:
        raise VisibilityError(f"pad {pad_id!r} is not visible from the camera")
    return [(float(t[i]), int(i), float(plen[i])) for i in rows]


# ---------------------------------------------------------------------------
# Scene construction from the finger


@dataclass(frozen=True)
class MountedMirror:
    phalanx: str                    # proximal | intermediate | distal
    p0: tuple[float, float]         # phalanx-local mm
    p1: tuple[float, float]
    # reflective side faces the local +y half-plane when flipped is False
    flipped: bool = False


@dataclass(frozen=True)
class SceneTemplate:
    """Camera and mirror placement in phalanx-local frames.

    The camera rides the intermediate phalanx; its boresight is relative
    to that phalanx's axis.  Pads sense toward local -y (the camera side).
    """
    camera_offset: tuple[float, float]
    camera_boresight_deg: float
    mirrors: tuple[MountedMirror, ...]
    occluders: tuple[tuple[str, tuple[float, float], tuple[float, float]], ...] = ()
    fov_deg: float = 160.0
    pixels: int = 1440


def _mirror_world(m: MountedMirror, origin: np.ndarray, angle: float) -> Mirror:
    R = geo.rot(angle)
    p0 = origin + R @ geo.vec(*m.p0)
    p1 = origin + R @ geo.vec(*m.p1)
    tang = geo.unit(p1 - p0)
    n = geo.vec(-tang[1], tang[0])
    if m.flipped:
        n = -n
    return Mirror(p0, p1, n)


def build_scene(params: fg.FingerParams, template: SceneTemplate,
                config: fg.FingerConfig) -> OpticsScene:
    """World scene for one finger configuration.

    Pads sense toward the finger interior (local -y): the camera images
    the backs of the translucent pads, tactile-sensor style.
    """
    pose = fg.forward_kinematics(params, config)
    pads = {}
    for name, (p0, p1) in pose.pads.items():
        tang = geo.unit(p1 - p0)
        pads[name] = Pad(p0, p1, geo.vec(tang[1], -tang[0]))
    frames = pose.frames
    mirrors = tuple(_mirror_world(m, *frames[m.phalanx]) for m in template.mirrors)
    occluders = []
    for phalanx, q0, q1 in template.occluders:
        origin, angle = frames[phalanx]
        R = geo.rot(angle)
        occluders.append((origin + R @ geo.vec(*q0), origin + R @ geo.vec(*q1)))
    co, ca = frames["intermediate"]
    R = geo.rot(ca)
    cam = Camera2D(position=co + R @ geo.vec(*template.camera_offset),
                   boresight=ca + math.radians(template.camera_boresight_deg),
                   fov_deg=template.fov_deg, pixels=template.pixels)
    return OpticsScene(pads=pads, mirrors=mirrors,
                       occluders=tuple(occluders), camera=cam)


@dataclass(frozen=True)
class CoverageEntry:
    config: fg.FingerConfig
    fractions: dict[str, float]
    feasible: bool


@dataclass(frozen=True)
class CoverageReport:
    entries: tuple[CoverageEntry, ...]
    min_fraction: dict[str, float]
    mean_fraction: dict[str, float]

    @property
    def maximin(self) -> float:
        return min(self.min_fraction.values())


def coverage_sweep(params: fg.FingerParams, template: SceneTemplate,
                   configs: list[fg.FingerConfig]) -> CoverageReport:
    """Visibility aggregated over a grid of finger configurations."""
    if not configs:
        raise ValidationError("empty configuration grid")
    entries = []
    sums = {n: 0.0 for n in PAD_NAMES}
    mins = {n: math.inf for n in PAD_NAMES}
    feasible = 0
    for cfg in configs:
        try:
            scene = build_scene(params, template, cfg)
            rep = visibility(scene)
        except (DomainError, ValidationError):
            entries.append(CoverageEntry(cfg, {}, False))
            continue
        feasible += 1
        for n in PAD_NAMES:
            sums[n] += rep.fractions[n]
            mins[n] = min(mins[n], rep.fractions[n])
        entries.append(CoverageEntry(cfg, dict(rep.fractions), True))
    if feasible == 0:
        raise ValidationError("no feasible configuration in the grid")
    return CoverageReport(
        entries=tuple(entries),
        min_fraction={n: mins[n] for n in PAD_NAMES},
        mean_fraction={n: sums[n] / feasible for n in PAD_NAMES})


def config_grid(step_deg: float = 5.0) -> list[fg.FingerConfig]:
    """The standard PIP x DIP audit grid over the operating range."""
    vals = np.arange(0.0, 90.0 + 1e-9, step_deg)
    return [fg.FingerConfig(0.0, float(p), float(d)) for p in vals for d in vals]


# Tuned camera and mirror placement for the reference finger: two mirrors
# on the proximal phalanx relay its pad, two on the intermediate phalanx
# cover the intermediate and distal pads.  Every pad keeps at least 95%
# of its length visible over the 0-90 x 0-90 degree joint grid.
REFERENCE_TEMPLATE = SceneTemplate(
    camera_offset=(4.664, -17.25),
    camera_boresight_deg=78.13,
    mirrors=(
        MountedMirror("proximal", (23.118115, -19.072676),
                      (42.081885, -17.719324)),
        MountedMirror("proximal", (46.685154, -24.430116),
                      (38.274846, -19.103884)),
        MountedMirror("intermediate", (33.641427, -44.660297),
                      (49.430573, -21.223703)),
        MountedMirror("intermediate", (74.447656, -24.19),
                      (74.446344, 13.376)),
    ))
