"""Property and oracle tests for the planar geometry kit."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from linkfold import geometry as geo
from linkfold.errors import DomainError, GeometryError

angles = st.floats(min_value=-10.0, max_value=10.0,
                   allow_nan=False, allow_infinity=False)
coords = st.floats(min_value=-1e3, max_value=1e3,
                   allow_nan=False, allow_infinity=False)


@given(angles)
def test_wrap_pi_range(theta):
    w = geo.wrap_pi(theta)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-12)
    assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-12)


@given(angles, angles)
def test_angle_between_is_symmetric_and_bounded(a, b):
    u = geo.vec(math.cos(a), math.sin(a))
    v = geo.vec(math.cos(b), math.sin(b))
    ang = geo.angle_between(u, v)
    assert 0.0 <= ang <= math.pi
    assert math.isclose(ang, geo.angle_between(v, u), abs_tol=1e-12)


def test_angle_between_rejects_zero_vector():
    with pytest.raises(GeometryError):
        geo.angle_between(geo.vec(0, 0), geo.vec(1, 0))


@given(angles, angles)
def test_reflect_is_an_involution_preserving_length(a, b):
    d = geo.vec(math.cos(a), math.sin(a))
    n = geo.vec(math.cos(b), math.sin(b))
    r = geo.reflect(d, n)
    assert math.isclose(geo.norm(r), 1.0, abs_tol=1e-12)
    back = geo.reflect(r, n)
    assert np.allclose(back, d, atol=1e-12)


@given(angles, angles)
def test_reflect_equal_angles_against_surface(a, b):
    d = geo.vec(math.cos(a), math.sin(a))
    n = geo.vec(math.cos(b), math.sin(b))
    r = geo.reflect(d, n)
    # incident and reflected rays make equal angles with the surface normal
    assert math.isclose(abs(float(np.dot(d, n))), abs(float(np.dot(r, n))),
                        abs_tol=1e-12)


def test_reflect_requires_unit_inputs():
    with pytest.raises(DomainError):
        geo.reflect(geo.vec(2, 0), geo.vec(0, 1))


@given(coords, coords, st.floats(min_value=0.1, max_value=100.0),
       st.floats(min_value=0.1, max_value=100.0),
       st.floats(min_value=0.05, max_value=0.95),
       st.sampled_from([-1, 1]))
def test_circle_circle_point_lies_on_both_circles(cx, cy, r0, r1, frac, sign):
    c0 = geo.vec(cx, cy)
    # separation chosen inside the intersection window
    lo, hi = abs(r0 - r1), r0 + r1
    d = lo + frac * (hi - lo)
    if d < 1e-6 or hi - lo < 1e-6:
        return
    c1 = c0 + geo.vec(d, 0)
    p = geo.circle_circle(c0, r0, c1, r1, sign)
    assert math.isclose(geo.norm(p - c0), r0, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(geo.norm(p - c1), r1, rel_tol=1e-9, abs_tol=1e-9)


def test_circle_circle_elbow_sign_picks_sides():
    c0, c1 = geo.vec(0, 0), geo.vec(2, 0)
    up = geo.circle_circle(c0, 2.0, c1, 2.0, +1)
    dn = geo.circle_circle(c0, 2.0, c1, 2.0, -1)
    assert up[1] > 0 > dn[1]
    assert np.allclose(up, [1.0, math.sqrt(3)], atol=1e-12)


def test_circle_circle_disjoint_raises():
    with pytest.raises(GeometryError):
        geo.circle_circle(geo.vec(0, 0), 1.0, geo.vec(5, 0), 1.0)
    with pytest.raises(GeometryError):
        geo.circle_circle(geo.vec(0, 0), 5.0, geo.vec(1, 0), 1.0)


def test_point_segment_distance_cases():
    a, b = geo.vec(0, 0), geo.vec(10, 0)
    assert geo.point_segment_distance(geo.vec(5, 3), a, b) == pytest.approx(3.0)
    assert geo.point_segment_distance(geo.vec(-4, 3), a, b) == pytest.approx(5.0)
    assert geo.point_segment_distance(geo.vec(13, 4), a, b) == pytest.approx(5.0)


def test_segment_distance_zero_when_crossing():
    assert geo.segment_segment_distance(
        geo.vec(0, -1), geo.vec(0, 1), geo.vec(-1, 0), geo.vec(1, 0)) == 0.0
    assert geo.segment_segment_distance(
        geo.vec(0, 1), geo.vec(10, 1), geo.vec(0, 4), geo.vec(10, 4)) == pytest.approx(3.0)


def test_polygon_area_sign_and_value():
    square = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    assert geo.polygon_area(square) == pytest.approx(4.0)
    assert geo.polygon_area(square[::-1]) == pytest.approx(-4.0)


def test_point_in_polygon_even_odd():
    square = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    assert geo.point_in_polygon(geo.vec(1, 1), square)
    assert not geo.point_in_polygon(geo.vec(3, 1), square)


def test_line_intersection_and_parallel_error():
    p = geo.line_intersection(geo.vec(0, 0), geo.vec(1, 1),
                              geo.vec(4, 0), geo.vec(0, 1))
    assert np.allclose(p, [4, 4], atol=1e-12)
    with pytest.raises(GeometryError):
        geo.line_intersection(geo.vec(0, 0), geo.vec(1, 0),
                              geo.vec(0, 1), geo.vec(2, 0))
