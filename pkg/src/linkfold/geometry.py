"""Small planar geometry kit used across the workbench.

Points and directions are numpy arrays of shape (2,), lengths in mm,
angles in radians unless a name says otherwise.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, GeometryError

TWO_PI = 2.0 * math.pi


def vec(x: float, y: float) -> np.ndarray:
    return np.array([float(x), float(y)])


def unit(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n == 0.0:
        raise GeometryError("cannot normalize zero vector")
    return v / n


def norm(v: np.ndarray) -> float:
    return float(np.hypot(v[0], v[1]))


def cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def angle_of(v: np.ndarray) -> float:
    return math.atan2(float(v[1]), float(v[0]))


def wrap_pi(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    t = math.fmod(theta + math.pi, TWO_PI)
    if t <= 0.0:
        t += TWO_PI
    return t - math.pi


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned angle in [0, pi] between two nonzero vectors."""
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        raise GeometryError("angle of zero-length vector")
    # atan2 form is stable for near-parallel vectors
    return math.atan2(abs(cross2(a, b)), float(np.dot(a, b)))


def reflect(direction: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Specular reflection r = d - 2 (d.n) n for unit d and unit n."""
    if abs(norm(direction) - 1.0) > 1e-9 or abs(norm(normal) - 1.0) > 1e-9:
        raise DomainError("reflect() expects unit-length inputs")
    return direction - 2.0 * float(np.dot(direction, normal)) * normal


def circle_circle(c0: np.ndarray, r0: float, c1: np.ndarray, r1: float,
                  sign: int = +1) -> np.ndarray:
    """One intersection point of two circles, selected by elbow sign.

    sign=+1 picks the intersection to the left of c0->c1, sign=-1 the right.
    Raises AssemblyError-compatible GeometryError when the circles do not meet.
    """
    d = norm(c1 - c0)
    if d == 0.0:
        raise GeometryError("concentric circles")
    if d > r0 + r1 or d < abs(r0 - r1):
        raise GeometryError(
            f"circles do not intersect (d={d:.6g}, r0={r0:.6g}, r1={r1:.6g})")
    a = (d * d + r0 * r0 - r1 * r1) / (2.0 * d)
    h2 = r0 * r0 - a * a
    h = math.sqrt(max(0.0, h2))
    u = (c1 - c0) / d
    perp = np.array([-u[1], u[0]])
    return c0 + a * u + (h if sign >= 0 else -h) * perp


def point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return norm(p - a)
    t = float(np.dot(p - a, ab)) / denom
    t = min(1.0, max(0.0, t))
    return norm(p - (a + t * ab))


def segment_segment_distance(a0, a1, b0, b1) -> float:
    if segments_intersect(a0, a1, b0, b1):
        return 0.0
    return min(
        point_segment_distance(a0, b0, b1),
        point_segment_distance(a1, b0, b1),
        point_segment_distance(b0, a0, a1),
        point_segment_distance(b1, a0, a1),
    )


def segments_intersect(a0, a1, b0, b1) -> bool:
    d1 = cross2(a1 - a0, b0 - a0)
    d2 = cross2(a1 - a0, b1 - a0)
    d3 = cross2(b1 - b0, a0 - b0)
    d4 = cross2(b1 - b0, a1 - b0)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def line_intersection(p0, d0, p1, d1) -> np.ndarray:
    """Intersection of two parameterized lines; raises on parallel."""
    denom = cross2(d0, d1)
    if abs(denom) < 1e-14 * max(1.0, norm(d0) * norm(d1)):
        raise GeometryError("parallel lines")
    t = cross2(p1 - p0, d1) / denom
    return p0 + t * d0


def polygon_area(pts: np.ndarray) -> float:
    """Signed area (positive for counterclockwise)."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(p: np.ndarray, pts: np.ndarray) -> bool:
    """Even-odd rule; boundary counts as inside within float noise."""
    inside = False
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            xint = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if p[0] < xint:
                inside = not inside
    return inside
