"""
Ground-truthed task facts for the three instance categories.

- spatial: a scene seen from 2-3 orthographic views (plus close-ups); one
  true relation is queried and three provably false ones become distractors.
- sequential: a primitive moving over an arena, one top-view frame per
  timestep, shown in shuffled order.
- analytical: a chain of pairwise size ratios, one image per link, whose
  product answers a cross-image size question.

Generators return facts plus an ImagePlan per image; nothing here touches
the filesystem. Each generator is a pure function of (spec, seed).
"""

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from shapely.geometry import box

from .errors import ErrorCode, TaskError
from .geometry import OVERLAP_EPS, View
from .logging import get_logger
from .render import ViewProjection, Window, fit_window, project, scene_window
from .scene import (
    AXIS_OF,
    COLORS,
    OPPOSITE,
    Box,
    Primitive,
    Relation,
    RelationFact,
    Scene,
    SceneSpec,
    Shape,
    candidate_facts,
    fact_views,
    generate_scene,
    spatial_relations,
)
from .utils import derive_seed, make_rng

Position = Tuple[int, int]

VIEW_ORDER = (View.FRONT, View.SIDE, View.TOP)

# Everyday objects roughly ordered small to large; chains pick increasing subsets
OBJECT_NAMES = (
    "coin",
    "key",
    "palm",
    "cola can",
    "mug",
    "book",
    "cat",
    "guitar",
    "chair",
    "bicycle",
    "person",
    "car",
    "truck",
    "bus",
    "house",
)

LINK_HEIGHT = 10.0
LINK_RADIUS_FACTOR = 0.25
LINK_GAP = 1.0


@dataclass(frozen=True)
class ImagePlan:
    """One image of an instance: what to rasterize and what it shows."""

    role: str  # "view", "closeup", "frame", "link", "decoy"
    view: View
    projection: ViewProjection
    window: Window
    primitives: Tuple[Primitive, ...]  # everything drawn, scene order
    detail: Dict[str, Any] = field(default_factory=dict)

    def primitive(self, primitive_id: str) -> Primitive:
        for p in self.primitives:
            if p.id == primitive_id:
                return p
        raise KeyError(primitive_id)

    def in_frame(self) -> List[Primitive]:
        """Primitives whose silhouette reaches into the window, back to front."""
        frame = box(*self.window.to_list())
        shown = []
        for shape in self.projection.shapes:
            if shape.outline.shape().intersection(frame).area > OVERLAP_EPS:
                shown.append(self.primitive(shape.primitive_id))
        return shown


def _plan(role: str, scene: Scene, view: View, window: Window, **detail: Any) -> ImagePlan:
    return ImagePlan(
        role=role,
        view=view,
        projection=project(scene, view),
        window=window,
        primitives=scene.primitives,
        detail=detail,
    )


# --- spatial ---------------------------------------------------------------


@dataclass(frozen=True)
class SpatialSpec:
    scene: SceneSpec = SceneSpec()
    total_images: int = 4
    margin: float = 0.05

    def to_dict(self) -> Dict[str, Any]:
        scene = asdict(self.scene)
        scene["bounds"] = self.scene.bounds.to_list()
        return {"scene": scene, "total_images": self.total_images, "margin": self.margin}


@dataclass(frozen=True)
class SpatialTaskFacts:
    scene: Scene
    views: Tuple[ViewProjection, ...]
    queried: RelationFact
    distractors: Tuple[RelationFact, ...]
    images: Tuple[ImagePlan, ...]

    category = "spatial"

    @property
    def task(self) -> str:
        return "occlusion" if self.queried.relation == Relation.OCCLUDES_IN_VIEW else "spatial_relation"

    def label(self, primitive_id: str) -> str:
        return self.scene.get(primitive_id).label


def spatial_distractors(
    scene: Scene,
    queried: RelationFact,
    rng: np.random.Generator,
    truth: Optional[set] = None,
) -> List[RelationFact]:
    """
    Three false facts about the queried pair.

    First the inverse (opposite direction on the same axis, or the swapped
    occlusion), then one false fact on each other axis; occlusion queries
    take their remaining two from false axis facts about the pair.
    """
    truth = truth if truth is not None else set(spatial_relations(scene))
    s, o = queried.subject, queried.object

    if queried.relation == Relation.OCCLUDES_IN_VIEW:
        first = RelationFact(o, Relation.OCCLUDES_IN_VIEW, s, queried.view)
        used_axes = set()
    else:
        first = RelationFact(s, OPPOSITE[queried.relation], o)
        used_axes = {AXIS_OF[queried.relation]}
    distractors = [first]

    for axis in ("x", "y", "z"):
        if axis in used_axes or len(distractors) == 3:
            continue
        options = [
            RelationFact(s, rel, o)
            for rel in OPPOSITE
            if AXIS_OF[rel] == axis and RelationFact(s, rel, o) not in truth
        ]
        distractors.append(options[int(rng.integers(len(options)))])

    if len(distractors) < 3:
        pool = [f for f in candidate_facts(s, o) if f not in truth and f not in distractors and f != queried]
        order = rng.permutation(len(pool))
        distractors.extend(pool[i] for i in order[: 3 - len(distractors)])

    return distractors


def gen_spatial(spec: SpatialSpec, seed: int) -> SpatialTaskFacts:
    """
    Spatial task facts: scene, 2-3 main views, queried fact and distractors.

    The queried fact is drawn uniformly from spatial_relations(scene); the
    main views always include one in which that fact is visible. Remaining
    image slots are close-ups of single primitives.

    Raises:
        TaskError(TASK_NO_RELATION_AVAILABLE): every pair ties on every axis.
    """
    if spec.total_images < 2:
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "spatial instances need at least 2 images")
    rng = make_rng(seed, "task")
    scene = generate_scene(spec.scene, derive_seed(seed, "scene"))
    facts = spatial_relations(scene)
    if not facts:
        raise TaskError(ErrorCode.TASK_NO_RELATION_AVAILABLE)

    queried = facts[int(rng.integers(len(facts)))]

    n_main = min(int(rng.integers(2, 4)), spec.total_images)
    visible_in = list(fact_views(queried))
    first_view = visible_in[int(rng.integers(len(visible_in)))]
    others = [v for v in VIEW_ORDER if v != first_view]
    picks = [others[i] for i in rng.permutation(len(others))[: n_main - 1]]
    main_views = [v for v in VIEW_ORDER if v == first_view or v in picks]

    distractors = spatial_distractors(scene, queried, rng, truth=set(facts))

    images = [_plan("view", scene, v, scene_window(scene, v, spec.margin)) for v in main_views]
    for _ in range(spec.total_images - n_main):
        focus = scene.primitives[int(rng.integers(len(scene.primitives)))]
        view = VIEW_ORDER[int(rng.integers(3))]
        window = fit_window([focus.silhouette(view)], margin=0.6)
        images.append(_plan("closeup", scene, view, window, focus=focus.id))

    get_logger("taskgen").debug("spatial: %d primitives, %d facts, query %s", len(scene.primitives), len(facts), queried)
    return SpatialTaskFacts(
        scene=scene,
        views=tuple(img.projection for img in images[:n_main]),
        queried=queried,
        distractors=tuple(distractors),
        images=tuple(images),
    )


# --- sequential ------------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    T: int = 4
    motion: str = "linear"
    speed_min: int = 1
    speed_max: int = 4
    arena: int = 40
    landmarks: int = 2

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SequenceTaskFacts:
    positions: Tuple[Position, ...]
    shuffle: Tuple[int, ...]  # shuffle[i] = timestep shown as image i+1
    offsets: Tuple[Position, ...]
    motion: str
    mover: Primitive
    landmarks: Tuple[Primitive, ...]
    images: Tuple[ImagePlan, ...]

    category = "sequential"
    task = "frame_ordering"

    @property
    def inverse(self) -> Tuple[int, ...]:
        """inverse[t] = 0-based image position showing timestep t."""
        inv = [0] * len(self.shuffle)
        for i, t in enumerate(self.shuffle):
            inv[t] = i
        return tuple(inv)

    @property
    def heading(self) -> Position:
        return self.offsets[0]


def _velocity(rng: np.random.Generator, speed_min: int, speed_max: int) -> Position:
    while True:
        vx, vy = (int(v) for v in rng.integers(-speed_max, speed_max + 1, size=2))
        if max(abs(vx), abs(vy)) >= speed_min:
            return (vx, vy)


def _trajectory(spec: SequenceSpec, rng: np.random.Generator) -> List[Position]:
    v1 = _velocity(rng, spec.speed_min, spec.speed_max)
    velocities = [v1] * (spec.T - 1)
    if spec.motion == "piecewise":
        while True:
            v2 = _velocity(rng, spec.speed_min, spec.speed_max)
            # Non-parallel turn keeps every position distinct
            if v1[0] * v2[1] - v1[1] * v2[0] != 0:
                break
        turn = int(rng.integers(1, spec.T - 1))
        velocities = [v1] * turn + [v2] * (spec.T - 1 - turn)

    rel = [(0, 0)]
    for vx, vy in velocities:
        rel.append((rel[-1][0] + vx, rel[-1][1] + vy))
    return rel


def gen_sequence(spec: SequenceSpec, seed: int) -> SequenceTaskFacts:
    """
    Sequential task facts: integer trajectory, offsets and a shuffled frame order.

    Positions live on the integer grid so offsets are exact. The shuffle is
    never the identity.
    """
    if spec.T < 3:
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "sequences need T >= 3")
    if spec.motion not in ("linear", "piecewise"):
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, f"unknown motion law {spec.motion!r}")
    rng = make_rng(seed, "task")
    margin = 3

    for _ in range(1000):
        rel = _trajectory(spec, rng)
        xs, ys = [p[0] for p in rel], [p[1] for p in rel]
        lo_x, hi_x = margin - min(xs), spec.arena - margin - max(xs)
        lo_y, hi_y = margin - min(ys), spec.arena - margin - max(ys)
        if lo_x <= hi_x and lo_y <= hi_y:
            break
    else:
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "arena too small for the requested speeds")

    start = (int(rng.integers(lo_x, hi_x + 1)), int(rng.integers(lo_y, hi_y + 1)))
    positions = tuple((start[0] + x, start[1] + y) for x, y in rel)
    offsets = tuple(
        (positions[t + 1][0] - positions[t][0], positions[t + 1][1] - positions[t][1])
        for t in range(spec.T - 1)
    )

    while True:
        shuffle = tuple(int(i) for i in rng.permutation(spec.T))
        if shuffle != tuple(range(spec.T)):
            break

    colors = [COLORS[i] for i in rng.permutation(len(COLORS))]
    mover_shape = Shape.CYLINDER if rng.integers(2) else Shape.CUBE
    mover_dims = (1.0, 2.0) if mover_shape == Shape.CYLINDER else (2.0,)

    landmarks: List[Primitive] = []
    for k in range(spec.landmarks):
        for _ in range(200):
            spot = (int(rng.integers(margin, spec.arena - margin + 1)), int(rng.integers(margin, spec.arena - margin + 1)))
            clear_of_path = all(max(abs(spot[0] - p[0]), abs(spot[1] - p[1])) >= 4 for p in positions)
            clear_of_marks = all(
                max(abs(spot[0] - m.center[0]), abs(spot[1] - m.center[1])) >= 4 for m in landmarks
            )
            if clear_of_path and clear_of_marks:
                color = colors[k + 1]
                landmarks.append(
                    Primitive(f"m{k}", Shape.CONE, (float(spot[0]), float(spot[1]), 1.5), (1.2, 3.0), color, f"{color} cone")
                )
                break

    mover_label = f"{colors[0]} {mover_shape.value}"
    half_h = mover_dims[-1] / 2
    bounds = Box((0.0, 0.0, 0.0), (float(spec.arena), float(spec.arena), 10.0))
    window = Window(0.0, 0.0, float(spec.arena), float(spec.arena))

    images = []
    for i, t in enumerate(shuffle):
        mover = Primitive("mover", mover_shape, (float(positions[t][0]), float(positions[t][1]), half_h), mover_dims, colors[0], mover_label)
        frame_scene = Scene(primitives=(mover, *landmarks), bounds=bounds)
        images.append(_plan("frame", frame_scene, View.TOP, window, timestep=t))

    return SequenceTaskFacts(
        positions=positions,
        shuffle=shuffle,
        offsets=offsets,
        motion=spec.motion,
        mover=Primitive("mover", mover_shape, (float(positions[0][0]), float(positions[0][1]), half_h), mover_dims, colors[0], mover_label),
        landmarks=tuple(landmarks),
        images=tuple(images),
    )


# --- analytical ------------------------------------------------------------


@dataclass(frozen=True)
class ScaleChainSpec:
    L: int = 2
    ratio_min: float = 1.0
    ratio_max: float = 12.0
    max_denominator: int = 8
    total_images: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ChainLink:
    image_index: int  # 1-based
    smaller: str
    larger: str
    ratio: Fraction  # size(larger) / size(smaller)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "image_index": self.image_index,
            "smaller": self.smaller,
            "larger": self.larger,
            "ratio": str(self.ratio),
        }


@dataclass(frozen=True)
class ScaleChainFacts:
    links: Tuple[ChainLink, ...]
    query: Tuple[str, str]  # (source, target): how many times larger is target than source
    multiplier: Fraction
    images: Tuple[ImagePlan, ...]
    decoys: Tuple[str, ...] = ()

    category = "analytical"
    task = "scale_chain"

    def link_images(self) -> List[int]:
        return [link.image_index for link in self.links]


def chain_product(ratios: Sequence[Fraction]) -> Fraction:
    return math.prod(ratios, start=Fraction(1))


def _random_ratio(spec: ScaleChainSpec, rng: np.random.Generator) -> Fraction:
    while True:
        den = int(rng.integers(1, spec.max_denominator + 1))
        lo = math.ceil(Fraction(repr(spec.ratio_min)) * den)
        hi = math.floor(Fraction(repr(spec.ratio_max)) * den)
        if lo <= hi:
            return Fraction(int(rng.integers(lo, hi + 1)), den)


def link_scene(
    smaller: Tuple[str, Shape, str],
    larger: Tuple[str, Shape, str],
    ratio: Fraction,
    larger_on_left: bool,
) -> Scene:
    """Two upright solids on a common ground line, heights in the given ratio."""
    big_h = LINK_HEIGHT
    small_h = LINK_HEIGHT / float(ratio)
    big_r = big_h * LINK_RADIUS_FACTOR
    small_r = small_h * LINK_RADIUS_FACTOR
    specs = [(larger, big_h, big_r), (smaller, small_h, small_r)]
    if not larger_on_left:
        specs.reverse()

    prims = []
    x = 0.0
    for k, ((label, shape, color), h, r) in enumerate(specs):
        x += r
        prims.append(Primitive(f"o{k}", shape, (x, 0.0, h / 2), (r, h), color, label))
        x += r + LINK_GAP
    bounds = Box((-1.0, -big_r - 1.0, -1.0), (x + 1.0, big_r + 1.0, big_h + 1.0))
    return Scene(primitives=tuple(prims), bounds=bounds)


def gen_scale_chain(spec: ScaleChainSpec, seed: int) -> ScaleChainFacts:
    """
    Analytical task facts: a size-ratio chain with pivot sharing.

    Link i compares labels[i] (smaller) with labels[i+1] (larger), so the
    larger object of one link is the smaller of the next. Each link is one
    front-view image; extra image slots get single decoy objects.
    """
    if spec.L < 2:
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "chains need L >= 2")
    total = spec.total_images if spec.total_images is not None else spec.L
    if total < spec.L:
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "image budget smaller than chain length")
    if spec.L + 1 + (total - spec.L) > len(OBJECT_NAMES):
        raise TaskError(ErrorCode.TASK_SPEC_INVALID, "not enough object names for chain and decoys")

    rng = make_rng(seed, "task")
    picked = sorted(int(i) for i in rng.choice(len(OBJECT_NAMES), size=spec.L + 1, replace=False))
    labels = [OBJECT_NAMES[i] for i in picked]
    spare = [n for n in OBJECT_NAMES if n not in labels]
    decoys = [spare[i] for i in rng.permutation(len(spare))[: total - spec.L]]

    colors = [COLORS[i] for i in rng.permutation(len(COLORS))]
    # Chain objects are cylinders: flat tops keep measured heights exact
    looks = {label: (label, Shape.CYLINDER, colors[k % len(colors)]) for k, label in enumerate(labels)}
    for k, label in enumerate(decoys, start=len(labels)):
        shape = Shape.CONE if rng.integers(2) else Shape.CYLINDER
        looks[label] = (label, shape, colors[k % len(colors)])

    ratios = [_random_ratio(spec, rng) for _ in range(spec.L)]
    slots = [int(i) + 1 for i in rng.permutation(total)]
    link_slots, decoy_slots = slots[: spec.L], slots[spec.L:]

    links = tuple(
        ChainLink(image_index=link_slots[i], smaller=labels[i], larger=labels[i + 1], ratio=ratios[i])
        for i in range(spec.L)
    )

    planned: Dict[int, ImagePlan] = {}
    for i, link in enumerate(links):
        scene = link_scene(looks[link.smaller], looks[link.larger], link.ratio, bool(rng.integers(2)))
        window = fit_window([p.silhouette(View.FRONT) for p in scene.primitives], margin=0.08)
        planned[link.image_index] = _plan("link", scene, View.FRONT, window, link=i)
    for slot, name in zip(decoy_slots, decoys):
        label, shape, color = looks[name]
        h = float(rng.uniform(4.0, 10.0))
        r = h * LINK_RADIUS_FACTOR
        prim = Primitive("o0", shape, (0.0, 0.0, h / 2), (r, h), color, label)
        scene = Scene(primitives=(prim,), bounds=Box((-r - 1, -r - 1, -1.0), (r + 1, r + 1, h + 1)))
        window = fit_window([prim.silhouette(View.FRONT)], margin=0.3)
        planned[slot] = _plan("decoy", scene, View.FRONT, window)

    return ScaleChainFacts(
        links=links,
        query=(labels[0], labels[-1]),
        multiplier=chain_product(ratios),
        images=tuple(planned[k] for k in range(1, total + 1)),
        decoys=tuple(decoys),
    )


TaskFacts = Union[SpatialTaskFacts, SequenceTaskFacts, ScaleChainFacts]
