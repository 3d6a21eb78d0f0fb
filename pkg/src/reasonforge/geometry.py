"""
2D silhouette geometry for orthographic views.

Each primitive projects to one convex outline per view: an axis-aligned
rectangle, a circle, or an isoceles triangle standing on its base. The same
outlines drive occlusion ground truth (scene module) and rasterization
(render module), so both always agree on what a view shows.

View conventions (x right, y depth into the scene, z up):
    front: (x, z), depth y   (looking along +y)
    side:  (y, z), depth x   (looking along +x)
    top:   (x, y), depth -z  (looking along -z)
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

import numpy as np
from shapely.geometry import Point, Polygon, box
from shapely.geometry.base import BaseGeometry

Point2 = Tuple[float, float]
Vec3 = Tuple[float, float, float]
Extent = Tuple[float, float, float, float]

# Shared-edge contact is not overlap
OVERLAP_EPS = 1e-9
CIRCLE_SEGMENTS = 64


class View(str, Enum):
    FRONT = "front"
    SIDE = "side"
    TOP = "top"


def drop_axis(point: Vec3, view: View) -> Tuple[Point2, float]:
    """Project a world point into (u, v) image-plane coordinates plus depth key."""
    x, y, z = point
    if view == View.FRONT:
        return (x, z), y
    if view == View.SIDE:
        return (y, z), x
    return (x, y), -z


@dataclass(frozen=True)
class Rect:
    cx: float
    cy: float
    half_w: float
    half_h: float

    kind = "rect"

    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.cx - self.half_w, self.cy - self.half_h, self.cx + self.half_w, self.cy + self.half_h)

    def vertices(self) -> List[Point2]:
        u0, v0, u1, v1 = self.bounds()
        return [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]

    def shape(self) -> BaseGeometry:
        return box(*self.bounds())

    def contains(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return (np.abs(u - self.cx) <= self.half_w) & (np.abs(v - self.cy) <= self.half_h)

    def to_dict(self) -> dict:
        return {"type": "rect", "center": [self.cx, self.cy], "half_size": [self.half_w, self.half_h]}


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float

    kind = "circle"

    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r)

    def shape(self) -> BaseGeometry:
        return Point(self.cx, self.cy).buffer(self.r, quad_segs=CIRCLE_SEGMENTS)

    def contains(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return (u - self.cx) ** 2 + (v - self.cy) ** 2 <= self.r * self.r

    def to_dict(self) -> dict:
        return {"type": "circle", "center": [self.cx, self.cy], "radius": self.r}


@dataclass(frozen=True)
class Triangle:
    """Isoceles triangle: base from (cx - half_base, base_v) to (cx + half_base, base_v), apex above."""

    cx: float
    base_v: float
    half_base: float
    height: float

    kind = "triangle"

    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.cx - self.half_base, self.base_v, self.cx + self.half_base, self.base_v + self.height)

    def vertices(self) -> List[Point2]:
        return [
            (self.cx - self.half_base, self.base_v),
            (self.cx + self.half_base, self.base_v),
            (self.cx, self.base_v + self.height),
        ]

    def shape(self) -> BaseGeometry:
        return Polygon(self.vertices())

    def contains(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        # Width at height t above the base shrinks linearly to 0 at the apex
        t = (v - self.base_v) / self.height
        inside_v = (t >= 0) & (t <= 1)
        return inside_v & (np.abs(u - self.cx) <= self.half_base * (1 - t))

    def to_dict(self) -> dict:
        return {
            "type": "triangle",
            "base_center": [self.cx, self.base_v],
            "half_base": self.half_base,
            "height": self.height,
        }


Outline = Union[Rect, Circle, Triangle]




def overlap_area(a: Outline, b: Outline) -> float:
    return a.shape().intersection(b.shape()).area


def outlines_overlap(a: Outline, b: Outline, min_area: float = OVERLAP_EPS) -> bool:
    """True when two outlines share more than `min_area` of the image plane."""
    if not a.shape().intersects(b.shape()):
        return False
    return overlap_area(a, b) > min_area


def view_extent(lo: Vec3, hi: Vec3, view: View, margin: float = 0.0) -> Extent:
    """World box seen from `view` as (u0, v0, u1, v1), padded by `margin` of each extent."""
    (u0, v0), _ = drop_axis(lo, view)
    (u1, v1), _ = drop_axis(hi, view)
    u0, u1 = sorted((u0, u1))
    v0, v1 = sorted((v0, v1))
    du, dv = (u1 - u0) * margin, (v1 - v0) * margin
    return (u0 - du, v0 - dv, u1 + du, v1 + dv)


def grid_centers(extent: Extent, width: int, height: int) -> Tuple[np.ndarray, np.ndarray]:
    """(u, v) of every pixel centre of a width x height grid over `extent`, row 0 at the top."""
    u0, v0, u1, v1 = extent
    cols = u0 + (np.arange(width) + 0.5) * ((u1 - u0) / width)
    rows = v1 - (np.arange(height) + 0.5) * ((v1 - v0) / height)
    return np.meshgrid(cols, rows)


def share_pixels(a: Outline, b: Outline, u: np.ndarray, v: np.ndarray) -> bool:
    """True when some sampled centre lies inside both outlines."""
    common = box(*a.bounds()).intersection(box(*b.bounds()))
    if common.is_empty:
        return False
    u0, v0, u1, v1 = common.bounds
    near = (u >= u0) & (u <= u1) & (v >= v0) & (v <= v1)
    uu, vv = u[near], v[near]
    return bool((a.contains(uu, vv) & b.contains(uu, vv)).any())
