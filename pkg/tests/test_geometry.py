import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitlab.errors import ConfigurationError
from slitlab.geometry import (BC, ConfocalEllipse, DomainSpec, EllipticalPoint, Rectangle, SlitSpec,
                              cartesian_to_elliptical, cutoff, ellipse_area, elliptical_to_cartesian,
                              metric_weights, node_motion_map)


def test_elliptical_to_cartesian_examples():
    assert elliptical_to_cartesian(1.0, EllipticalPoint(0.0, 0.0)) == pytest.approx((1.0, 0.0), abs=1e-15)
    assert elliptical_to_cartesian(0.0, EllipticalPoint(2.0, math.pi / 2)) == pytest.approx((0.0, 2.0), abs=1e-15)
    p = np.array(elliptical_to_cartesian(1.0, EllipticalPoint(1.0, math.pi / 2)))
    assert p == pytest.approx([0.0, 1.0], abs=1e-15)
    focal = np.linalg.norm(p - [1, 0]) + np.linalg.norm(p + [1, 0])
    assert focal == pytest.approx(2 * math.sqrt(2), rel=1e-14)


def test_center_offset():
    assert elliptical_to_cartesian(1.0, EllipticalPoint(0.0, 0.0), (2.0, 3.0)) == pytest.approx((3.0, 3.0))


def test_metric_weight_examples():
    assert metric_weights(0.0, EllipticalPoint(2.0, 0.7))[2] == pytest.approx(2.0)
    assert metric_weights(1.0, EllipticalPoint(0.0, math.pi / 2))[2] == pytest.approx(1.0)
    assert metric_weights(1.0, EllipticalPoint(1.0, 0.0))[2] == pytest.approx(1 / math.sqrt(2))
    g_r, g_th, _ = metric_weights(0.0, EllipticalPoint(2.0, 0.3))
    assert (g_r, g_th) == pytest.approx((1.0, 0.25))


def test_metric_degenerate():
    with pytest.raises(ConfigurationError):
        metric_weights(0.0, EllipticalPoint(0.0, 1.0))


def test_side_tags_on_slit():
    assert EllipticalPoint(0.0, 1.0).side == 1
    assert EllipticalPoint(0.0, 4.0).side == -1
    assert EllipticalPoint(0.0, 0.0).side == 0
    lower = cartesian_to_elliptical(1.0, (0.3, 0.0), side=-1)
    upper = cartesian_to_elliptical(1.0, (0.3, 0.0), side=1)
    assert lower.side == -1 and upper.side == 1
    assert lower.theta == pytest.approx(2 * math.pi - upper.theta)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 5.0), st.floats(0.0, 2 * math.pi - 1e-9), st.floats(0.01, 2.0))
def test_round_trip(r, theta, t):
    p = elliptical_to_cartesian(t, EllipticalPoint(r, theta))
    q = cartesian_to_elliptical(t, p)
    back = elliptical_to_cartesian(t, q)
    assert back == pytest.approx(p, abs=1e-12 * (1 + r + t))


def test_measure_consistency():
    """Quadrature of the density over r <= R reproduces the ellipse area."""
    t, R = 0.7, 1.3
    g, w = np.polynomial.legendre.leggauss(64)
    r = 0.5 * R * (g + 1)
    wr = 0.5 * R * w
    n = 256
    th = 2 * math.pi * np.arange(n) / n
    total = 0.0
    for ri, wi in zip(r, wr):
        # dA = |J| dr dtheta with |J| = (r^2 + t^2 sin^2)/sqrt(r^2 + t^2)
        dens = np.array([metric_weights(t, EllipticalPoint(ri, a))[2] for a in th])
        total += wi * dens.sum() * 2 * math.pi / n
    assert total == pytest.approx(ellipse_area(t, R), rel=1e-12)


def test_cutoff_shape():
    s = np.linspace(0, 3, 301)
    c = cutoff(s)
    assert np.all(c[s <= 1] == 1.0) and np.all(c[s >= 2] == 0.0)
    assert np.all(np.diff(c) <= 0)


def test_node_motion_identity_and_far_field():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(500, 2))
    assert np.array_equal(node_motion_map(pts, 0.2, 0.2, 0.25), pts)
    moved = node_motion_map(pts, 0.2, 0.05, 0.25)
    far = np.linalg.norm(pts, axis=1) >= 0.5
    assert np.array_equal(moved[far], pts[far])


def test_node_motion_endpoints():
    out = node_motion_map(np.array([[0.2, 0.0], [-0.2, 0.0]]), 0.2, 0.07, 0.25)
    assert out == pytest.approx(np.array([[0.07, 0.0], [-0.07, 0.0]]), abs=1e-14)


def test_node_motion_rotated_slit():
    c = (0.4, 0.6)
    ends = np.array([[0.4, 0.8], [0.4, 0.4]])
    out = node_motion_map(ends, 0.2, 0.1, 0.25, center=c, angle=math.pi / 2)
    assert out == pytest.approx(np.array([[0.4, 0.7], [0.4, 0.5]]), abs=1e-14)


def test_node_motion_continuous_at_zone_edge():
    th = np.linspace(0, 2 * math.pi, 50)
    ring = 0.5 * np.stack([np.cos(th), np.sin(th)], axis=1)
    inner = ring * (1 - 1e-9)
    assert node_motion_map(inner, 0.2, 0.02, 0.25) == pytest.approx(inner, abs=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.2))
def test_node_motion_orientation_preserving(t):
    """Signed areas of a fine grid stay positive under the map."""
    x = np.linspace(-0.6, 0.6, 41)
    X, Y = np.meshgrid(x, x, indexing="ij")
    pts = np.stack([X, Y], axis=-1)
    m = node_motion_map(pts, 0.2, t, 0.25)
    a, b, c = m[:-1, :-1], m[1:, :-1], m[:-1, 1:]
    det = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
    assert np.all(det > 0)


def test_node_motion_rejects_t_at_r0():
    with pytest.raises(ConfigurationError):
        node_motion_map(np.zeros((1, 2)), 0.2, 0.25, 0.25)


SQUARE = """
outer.kind = rectangle
outer.a = 1
outer.b = 1
chart_radius_r0 = 0.25
outer_bc.top = neumann
slit.0.cx = 0.5
slit.0.cy = 0.5
slit.0.t = 0.2
slit.0.bc = n
"""


def test_domain_text_round_trip():
    spec = DomainSpec.from_text(SQUARE)
    assert spec.outer_bc["top"] is BC.NEUMANN and spec.outer_bc["left"] is BC.DIRICHLET
    assert spec.slits[0].condition is BC.NEUMANN
    again = DomainSpec.from_text(spec.to_text())
    assert again == spec


@pytest.mark.parametrize("text", [
    "outer.kind = circle",
    "outer.kind = rectangle\nouter.a = 1",
    "outer.kind = rectangle\nouter.a = x\nouter.b = 1",
    "outer.kind = rectangle\nouter.a = 1\nouter.b = 1\nbogus = 3",
    "outer.kind = rectangle\nouter.a = 1\nouter.b = 1\nouter_bc.left = robin",
    "just a line",
])
def test_domain_malformed(text):
    with pytest.raises(ConfigurationError):
        DomainSpec.from_text(text)


def test_domain_clearance_and_disjointness():
    with pytest.raises(ConfigurationError):
        DomainSpec(Rectangle(1, 1), [SlitSpec((0.2, 0.5), 0, 0.1)], chart_radius_r0=0.25)
    with pytest.raises(ConfigurationError):
        DomainSpec(Rectangle(2, 1), [SlitSpec((0.5, 0.5), 0, 0.1), SlitSpec((1.2, 0.5), 0, 0.1)],
                   chart_radius_r0=0.25)
    DomainSpec(Rectangle(2, 1), [SlitSpec((0.5, 0.5), 0, 0.1), SlitSpec((1.5, 0.5), 0, 0.1)], chart_radius_r0=0.25)


def test_ellipse_domain_area():
    spec = DomainSpec(ConfocalEllipse(math.asinh(1 / 0.3)), [SlitSpec((0, 0), 0, 0.3)])
    assert spec.area == pytest.approx(math.pi * 1.0 * math.hypot(1.0, 0.3))
