"""
3D scenes of geometric primitives and their spatial-relation ground truth.

A Scene is a small set of cubes, cylinders and cones placed in an
axis-aligned world box. Every spatial fact a question can ask about is
derived here from coordinates alone: axis relations from centre
differences, occlusion from strict depth order plus a silhouette overlap
that covers at least one pixel centre of a 64x64 grid over the world box.

Axes: x = right, y = depth into the scene, z = up.
Cylinders and cones stand upright; `center` is the centre of the bounding box.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ErrorCode, SceneError
from .geometry import (
    Circle,
    Outline,
    Rect,
    Triangle,
    View,
    drop_axis,
    grid_centers,
    outlines_overlap,
    share_pixels,
    view_extent,
)
from .logging import get_logger
from .utils import make_rng, weighted_choice

Vec3 = Tuple[float, float, float]
PixelGrid = Tuple[np.ndarray, np.ndarray]

TIE_TOLERANCE = 1e-9
OCCLUSION_GRID = 64
DEFAULT_MAX_ATTEMPTS = 10_000
COORD_DECIMALS = 2


class Shape(str, Enum):
    CUBE = "cube"
    CYLINDER = "cylinder"
    CONE = "cone"


# Fixed palette; names appear verbatim in captions
PALETTE: Dict[str, Tuple[int, int, int]] = {
    "red": (220, 40, 40),
    "blue": (40, 80, 220),
    "green": (40, 170, 70),
    "yellow": (235, 200, 30),
    "purple": (140, 60, 190),
    "orange": (245, 140, 30),
    "cyan": (40, 200, 210),
    "gray": (128, 128, 128),
}
COLORS = tuple(PALETTE)


class Relation(str, Enum):
    LEFT_OF = "left-of"
    RIGHT_OF = "right-of"
    ABOVE = "above"
    BELOW = "below"
    IN_FRONT_OF = "in-front-of"
    BEHIND = "behind"
    OCCLUDES_IN_VIEW = "occludes-in-view"


OPPOSITE = {
    Relation.LEFT_OF: Relation.RIGHT_OF,
    Relation.RIGHT_OF: Relation.LEFT_OF,
    Relation.ABOVE: Relation.BELOW,
    Relation.BELOW: Relation.ABOVE,
    Relation.IN_FRONT_OF: Relation.BEHIND,
    Relation.BEHIND: Relation.IN_FRONT_OF,
}

AXIS_OF = {
    Relation.LEFT_OF: "x",
    Relation.RIGHT_OF: "x",
    Relation.IN_FRONT_OF: "y",
    Relation.BEHIND: "y",
    Relation.ABOVE: "z",
    Relation.BELOW: "z",
}

# Views in which each axis is visible as an image-plane direction
VIEWS_SHOWING_AXIS = {
    "x": (View.FRONT, View.TOP),
    "y": (View.SIDE, View.TOP),
    "z": (View.FRONT, View.SIDE),
}


@dataclass(frozen=True)
class Primitive:
    """
    One solid in a scene.

    dims: cube -> (edge,); cylinder/cone -> (radius, height).
    """

    id: str
    shape: Shape
    center: Vec3
    dims: Tuple[float, ...]
    color: str
    label: str

    def __post_init__(self):
        expected = 1 if self.shape == Shape.CUBE else 2
        if len(self.dims) != expected or any(d <= 0 for d in self.dims):
            raise SceneError(ErrorCode.SCENE_INVALID, f"{self.id}: extents must be {expected} positive values")
        if self.color not in PALETTE:
            raise SceneError(ErrorCode.SCENE_INVALID, f"{self.id}: unknown color {self.color!r}")

    @property
    def half_extents(self) -> Vec3:
        if self.shape == Shape.CUBE:
            h = self.dims[0] / 2
            return (h, h, h)
        radius, height = self.dims
        return (radius, radius, height / 2)

    def bbox(self) -> Tuple[Vec3, Vec3]:
        hx, hy, hz = self.half_extents
        x, y, z = self.center
        return (x - hx, y - hy, z - hz), (x + hx, y + hy, z + hz)

    def silhouette(self, view: View) -> Outline:
        """Orthographic silhouette of the solid in a view."""
        (u, v), _ = drop_axis(self.center, view)
        if self.shape == Shape.CUBE:
            h = self.dims[0] / 2
            return Rect(u, v, h, h)
        radius, height = self.dims
        if view == View.TOP:
            return Circle(u, v, radius)
        if self.shape == Shape.CYLINDER:
            return Rect(u, v, radius, height / 2)
        return Triangle(u, v - height / 2, radius, height)

    def depth(self, view: View) -> float:
        return drop_axis(self.center, view)[1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "shape": self.shape.value,
            "center": list(self.center),
            "dims": list(self.dims),
            "color": self.color,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Primitive":
        return cls(
            id=str(data["id"]),
            shape=Shape(data["shape"]),
            center=tuple(float(c) for c in data["center"]),
            dims=tuple(float(d) for d in data["dims"]),
            color=data["color"],
            label=data["label"],
        )


@dataclass(frozen=True)
class Box:
    lo: Vec3
    hi: Vec3

    def contains_box(self, lo: Vec3, hi: Vec3) -> bool:
        return all(a >= b - TIE_TOLERANCE for a, b in zip(lo, self.lo)) and all(
            a <= b + TIE_TOLERANCE for a, b in zip(hi, self.hi)
        )

    def to_list(self) -> List[List[float]]:
        return [list(self.lo), list(self.hi)]


@dataclass(frozen=True)
class Scene:
    primitives: Tuple[Primitive, ...]
    bounds: Box

    def __post_init__(self):
        ids = [p.id for p in self.primitives]
        labels = [p.label for p in self.primitives]
        if len(set(ids)) != len(ids):
            raise SceneError(ErrorCode.SCENE_INVALID, "primitive ids must be unique")
        if len(set(labels)) != len(labels):
            raise SceneError(ErrorCode.SCENE_INVALID, "primitive labels must be unique")
        for p in self.primitives:
            if not self.bounds.contains_box(*p.bbox()):
                raise SceneError(ErrorCode.SCENE_INVALID, f"{p.id} lies outside the scene bounds")

    def get(self, primitive_id: str) -> Primitive:
        for p in self.primitives:
            if p.id == primitive_id:
                return p
        raise KeyError(primitive_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bounds": self.bounds.to_list(),
            "primitives": [p.to_dict() for p in self.primitives],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scene":
        lo, hi = data["bounds"]
        return cls(
            primitives=tuple(Primitive.from_dict(p) for p in data["primitives"]),
            bounds=Box(tuple(float(v) for v in lo), tuple(float(v) for v in hi)),
        )


@dataclass(frozen=True)
class RelationFact:
    """`subject` stands in `relation` to `object` (in `view`, for occlusion)."""

    subject: str
    relation: Relation
    object: str
    view: Optional[View] = None

    def __post_init__(self):
        if self.subject == self.object:
            raise SceneError(ErrorCode.SCENE_INVALID, "relation subject and object must differ")
        if (self.relation == Relation.OCCLUDES_IN_VIEW) != (self.view is not None):
            raise SceneError(ErrorCode.SCENE_INVALID, "view is required exactly for occludes-in-view")

    def inverse(self) -> "RelationFact":
        """The equivalent fact read from the object's side."""
        if self.relation == Relation.OCCLUDES_IN_VIEW:
            raise ValueError("occlusion has no same-meaning inverse")
        return RelationFact(self.object, OPPOSITE[self.relation], self.subject)

    def to_dict(self) -> Dict[str, Any]:
        data = {"subject": self.subject, "relation": self.relation.value, "object": self.object}
        if self.view is not None:
            data["view"] = self.view.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RelationFact":
        view = data.get("view")
        return cls(
            subject=data["subject"],
            relation=Relation(data["relation"]),
            object=data["object"],
            view=View(view) if view else None,
        )


@dataclass(frozen=True)
class SceneSpec:
    """Parameters for generate_scene."""

    count_min: int = 2
    count_max: int = 5
    shape_weights: Dict[str, float] = field(default_factory=lambda: {"cube": 1.0, "cylinder": 1.0, "cone": 1.0})
    min_separation: float = 0.5
    bounds: Box = Box((0.0, 0.0, 0.0), (10.0, 10.0, 10.0))
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    edge_range: Tuple[float, float] = (0.8, 2.0)
    radius_range: Tuple[float, float] = (0.4, 1.0)
    height_range: Tuple[float, float] = (0.8, 2.4)

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "SceneSpec":
        lo, hi = section["bounds"]
        return cls(
            count_min=section["count_min"],
            count_max=section["count_max"],
            shape_weights=dict(section["shape_weights"]),
            min_separation=section["min_separation"],
            bounds=Box(tuple(lo), tuple(hi)),
            max_attempts=section["max_attempts"],
            edge_range=tuple(section["edge_range"]),
            radius_range=tuple(section["radius_range"]),
            height_range=tuple(section["height_range"]),
        )

    def validate(self) -> None:
        if self.count_min < 2 or self.count_max < self.count_min:
            raise SceneError(ErrorCode.SCENE_SPEC_INVALID, "count range must satisfy 2 <= min <= max")
        if self.min_separation < 0:
            raise SceneError(ErrorCode.SCENE_SPEC_INVALID, "min separation must be >= 0")
        if not any(self.shape_weights.get(s.value, 0) > 0 for s in Shape):
            raise SceneError(ErrorCode.SCENE_SPEC_INVALID, "no shape has positive weight")


def box_gap(a: Tuple[Vec3, Vec3], b: Tuple[Vec3, Vec3]) -> float:
    """Euclidean distance between two axis-aligned boxes (0 when they touch or overlap)."""
    (alo, ahi), (blo, bhi) = a, b
    total = 0.0
    for i in range(3):
        d = max(0.0, alo[i] - bhi[i], blo[i] - ahi[i])
        total += d * d
    return total ** 0.5


def boxes_interpenetrate(a: Tuple[Vec3, Vec3], b: Tuple[Vec3, Vec3]) -> bool:
    (alo, ahi), (blo, bhi) = a, b
    return all(alo[i] < bhi[i] - TIE_TOLERANCE and blo[i] < ahi[i] - TIE_TOLERANCE for i in range(3))


def _unique_label(color: str, shape: Shape, taken: set) -> str:
    base = f"{color} {shape.value}"
    if base not in taken:
        return base
    n = 2
    while f"{base} {n}" in taken:
        n += 1
    return f"{base} {n}"


def _random_primitive(spec: SceneSpec, rng: np.random.Generator, index: int, taken_labels: set) -> Optional[Primitive]:
    shapes = [s for s in Shape if spec.shape_weights.get(s.value, 0) > 0]
    shape = weighted_choice(rng, shapes, [spec.shape_weights[s.value] for s in shapes])
    if shape == Shape.CUBE:
        dims = (round(float(rng.uniform(*spec.edge_range)), COORD_DECIMALS),)
    else:
        dims = (
            round(float(rng.uniform(*spec.radius_range)), COORD_DECIMALS),
            round(float(rng.uniform(*spec.height_range)), COORD_DECIMALS),
        )
    color = COLORS[int(rng.integers(len(COLORS)))]

    if shape == Shape.CUBE:
        half = (dims[0] / 2,) * 3
    else:
        half = (dims[0], dims[0], dims[1] / 2)

    scale = 10 ** COORD_DECIMALS
    center = []
    for axis in range(3):
        # Centre range snapped inward to the coordinate grid
        lo = np.ceil((spec.bounds.lo[axis] + half[axis]) * scale) / scale
        hi = np.floor((spec.bounds.hi[axis] - half[axis]) * scale) / scale
        if lo > hi:
            return None
        c = round(float(rng.uniform(lo, hi)), COORD_DECIMALS)
        center.append(float(min(max(c, lo), hi)))

    return Primitive(
        id=f"p{index}",
        shape=shape,
        center=(center[0], center[1], center[2]),
        dims=dims,
        color=color,
        label=_unique_label(color, shape, taken_labels),
    )


def generate_scene(spec: SceneSpec, seed: int) -> Scene:
    """
    Place primitives by seeded rejection sampling.

    Bounding boxes are kept at least `min_separation` apart (and never
    interpenetrate). The attempt budget is shared by the whole scene.

    Raises:
        SceneError(SCENE_PLACEMENT_EXHAUSTED): budget spent before all
            primitives fit.
    """
    spec.validate()
    logger = get_logger("scene")
    rng = make_rng(seed)
    count = int(rng.integers(spec.count_min, spec.count_max + 1))

    placed: List[Primitive] = []
    labels: set = set()
    attempts = 0
    while len(placed) < count:
        if attempts >= spec.max_attempts:
            logger.debug("Placement exhausted: %d/%d placed after %d attempts", len(placed), count, attempts)
            raise SceneError(
                ErrorCode.SCENE_PLACEMENT_EXHAUSTED,
                f"Placed {len(placed)} of {count} primitives in {spec.max_attempts} attempts",
            )
        attempts += 1
        candidate = _random_primitive(spec, rng, len(placed), labels)
        if candidate is None:
            continue
        box = candidate.bbox()
        if all(
            not boxes_interpenetrate(box, other.bbox()) and box_gap(box, other.bbox()) >= spec.min_separation
            for other in placed
        ):
            placed.append(candidate)
            labels.add(candidate.label)

    return Scene(primitives=tuple(placed), bounds=spec.bounds)


def axis_relations(a: Primitive, b: Primitive, tolerance: float = TIE_TOLERANCE) -> List[RelationFact]:
    """Axis facts with `a` as subject; nothing is emitted on a tied axis."""
    facts = []
    pairs = (
        (0, Relation.RIGHT_OF, Relation.LEFT_OF),
        (1, Relation.BEHIND, Relation.IN_FRONT_OF),
        (2, Relation.ABOVE, Relation.BELOW),
    )
    for axis, greater, lesser in pairs:
        delta = a.center[axis] - b.center[axis]
        if delta > tolerance:
            facts.append(RelationFact(a.id, greater, b.id))
        elif delta < -tolerance:
            facts.append(RelationFact(a.id, lesser, b.id))
    return facts


def occlusion_grid(bounds: Box, view: View, size: int = OCCLUSION_GRID) -> PixelGrid:
    """Pixel centres over the world box seen from `view`; occlusion must cover one of them."""
    return grid_centers(view_extent(bounds.lo, bounds.hi, view), size, size)


def occludes(
    a: Primitive,
    b: Primitive,
    view: View,
    grid: Optional[PixelGrid] = None,
    tolerance: float = TIE_TOLERANCE,
) -> bool:
    """
    True when `a` hides part of `b` in `view`: `a` is strictly nearer and
    the silhouettes overlap.

    With a grid, the overlap must contain one of its pixel centres, so a
    sliver between centres is not an occlusion. Without one any overlap of
    positive area counts.
    """
    if a.depth(view) >= b.depth(view) - tolerance:
        return False
    sa, sb = a.silhouette(view), b.silhouette(view)
    if grid is None:
        return outlines_overlap(sa, sb)
    return share_pixels(sa, sb, *grid)


def spatial_relations(
    scene: Scene,
    tolerance: float = TIE_TOLERANCE,
    grid_size: int = OCCLUSION_GRID,
) -> List[RelationFact]:
    """
    Every relation fact that holds in the scene.

    For each ordered pair: axis relations where centre coordinates differ by
    more than `tolerance`, then occlusion per view, decided on a
    grid_size x grid_size pixel grid over the world box. Order is
    deterministic (pair order, then x/y/z, then front/side/top).
    """
    grids = {view: occlusion_grid(scene.bounds, view, grid_size) for view in View}
    facts: List[RelationFact] = []
    for a, b in permutations(scene.primitives, 2):
        facts.extend(axis_relations(a, b, tolerance))
        for view in View:
            if occludes(a, b, view, grids[view], tolerance):
                facts.append(RelationFact(a.id, Relation.OCCLUDES_IN_VIEW, b.id, view))
    return facts


def candidate_facts(subject: str, object_: str) -> List[RelationFact]:
    """All relation facts expressible about an ordered pair, true or not."""
    facts = [RelationFact(subject, rel, object_) for rel in OPPOSITE]
    facts.extend(RelationFact(subject, Relation.OCCLUDES_IN_VIEW, object_, v) for v in View)
    facts.extend(RelationFact(object_, Relation.OCCLUDES_IN_VIEW, subject, v) for v in View)
    return facts


def fact_views(fact: RelationFact) -> Sequence[View]:
    """Views in which a fact can be read off directly."""
    if fact.relation == Relation.OCCLUDES_IN_VIEW:
        return (fact.view,)
    return VIEWS_SHOWING_AXIS[AXIS_OF[fact.relation]]
