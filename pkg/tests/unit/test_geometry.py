"""Tests for view projection conventions and silhouette overlap."""

import numpy as np
import pytest

from reasonforge.geometry import (
    Circle,
    Rect,
    Triangle,
    View,
    drop_axis,
    grid_centers,
    outlines_overlap,
    overlap_area,
    share_pixels,
    view_extent,
)


@pytest.mark.parametrize("view,uv,depth", [
    (View.FRONT, (1, 3), 2),
    (View.SIDE, (2, 3), 1),
    (View.TOP, (1, 2), -3),
])
def test_drop_axis(view, uv, depth):
    """front drops y, side drops x, top drops z (nearer = higher z)."""
    assert drop_axis((1, 2, 3), view) == (uv, depth)


class TestContains:

    def test_rect_edges_inclusive(self):
        r = Rect(0, 0, 1, 1)
        assert r.contains(np.array([1.0, 1.01]), np.array([0.0, 0.0])).tolist() == [True, False]

    def test_circle(self):
        c = Circle(0, 0, 1)
        assert c.contains(np.array([0.7, 0.8]), np.array([0.7, 0.8])).tolist() == [True, False]

    def test_triangle_narrows_to_apex(self):
        t = Triangle(0, 0, 1, 2)
        u = np.array([0.9, 0.0, 0.4, 0.0])
        v = np.array([0.1, 1.9, 1.5, 2.1])
        assert t.contains(u, v).tolist() == [True, True, False, False]


class TestOverlap:

    def test_overlapping_rects(self):
        assert outlines_overlap(Rect(0, 0, 1, 1), Rect(1.5, 0, 1, 1))

    def test_touching_rects_do_not_overlap(self):
        assert not outlines_overlap(Rect(0, 0, 1, 1), Rect(2, 0, 1, 1))

    def test_circles(self):
        assert outlines_overlap(Circle(0, 0, 1), Circle(1.5, 0, 1))
        assert not outlines_overlap(Circle(0, 0, 1), Circle(2, 0, 1))

    def test_circle_rect_corner_gap(self):
        # Circle near the rect corner but outside it
        assert not outlines_overlap(Circle(1.6, 1.6, 0.8), Rect(0, 0, 1, 1))
        assert outlines_overlap(Circle(1.4, 1.4, 0.8), Rect(0, 0, 1, 1))

    def test_triangle_rect_near_apex(self):
        tri = Triangle(0, 0, 1, 2)
        assert outlines_overlap(tri, Rect(0, 1.9, 0.05, 0.05))
        assert not outlines_overlap(tri, Rect(0.9, 1.8, 0.05, 0.05))

    def test_triangle_circle(self):
        tri = Triangle(0, 0, 1, 2)
        assert outlines_overlap(tri, Circle(0, 1, 0.2))
        assert not outlines_overlap(Circle(2, 2, 0.5), tri)

    def test_symmetric(self):
        shapes = [Rect(0, 0, 1, 1), Circle(1.2, 0, 0.5), Triangle(0.5, -1, 1, 2)]
        for a in shapes:
            for b in shapes:
                assert outlines_overlap(a, b) == outlines_overlap(b, a)

    def test_overlap_area(self):
        assert overlap_area(Rect(0, 0, 1, 1), Rect(1.5, 0, 1, 1)) == pytest.approx(1.0)
        assert overlap_area(Rect(0, 0, 1, 1), Rect(3, 0, 1, 1)) == 0
        # Circle fully inside the square
        assert overlap_area(Circle(0, 0, 0.5), Rect(0, 0, 1, 1)) == pytest.approx(np.pi / 4, rel=1e-3)

    def test_min_area_threshold(self):
        # 0.05 x 2 strip
        a, b = Rect(0, 0, 1, 1), Rect(1.95, 0, 1, 1)
        assert outlines_overlap(a, b)
        assert not outlines_overlap(a, b, min_area=0.2)


class TestGrid:

    @pytest.mark.parametrize("view,extent", [
        (View.FRONT, (0, 0, 4, 6)),
        (View.SIDE, (0, 0, 5, 6)),
        (View.TOP, (0, 0, 4, 5)),
    ])
    def test_view_extent(self, view, extent):
        assert view_extent((0, 0, 0), (4, 5, 6), view) == extent

    def test_view_extent_margin(self):
        assert view_extent((0, 0, 0), (10, 10, 10), View.FRONT, margin=0.1) == (-1, -1, 11, 11)

    def test_grid_centers_row_zero_on_top(self):
        u, v = grid_centers((0, 0, 4, 2), 4, 2)
        assert u[0].tolist() == [0.5, 1.5, 2.5, 3.5]
        assert v[:, 0].tolist() == [1.5, 0.5]

    def test_share_pixels_ignores_slivers_between_centres(self):
        u, v = grid_centers((0, 0, 4, 4), 4, 4)
        # Overlap u in [1.9, 2.1] holds no centre
        assert not share_pixels(Rect(1, 2, 1.1, 1), Rect(3, 2, 1.1, 1), u, v)
        assert share_pixels(Rect(1, 2, 1.6, 1), Rect(3, 2, 1.1, 1), u, v)
