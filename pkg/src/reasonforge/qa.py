"""
Question, distractor and reasoning-step construction.

Turns task facts into Instances: a templated four-option MCQ whose wrong
options are provably false, five template-filled reasoning steps, and the
interleaved text/image segment list. All phrasing comes from the template
catalog (templates/catalog.json by default) so wording changes need no code.
"""

import json
import re
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import CATEGORIES
from .errors import ErrorCode, QAError
from .geometry import Rect
from .models import MCQ, OPTION_KEYS, STEP_NAMES, Instance, ReasoningSteps, Segment
from .render import ImageFormat, image_filename
from .scene import AXIS_OF, Primitive, Relation, RelationFact, fact_views, spatial_relations
from .taskgen import (
    ImagePlan,
    ScaleChainFacts,
    SequenceTaskFacts,
    SpatialTaskFacts,
    TaskFacts,
    chain_product,
)
from .utils import format_ratio, make_rng

DEFAULT_CATALOG = Path(__file__).parent / "templates" / "catalog.json"
EXPECTED_CATALOG_VERSION = 1

# Tried in order after x2/3, x3/2 and one link ratio
NUMERIC_FALLBACKS = (
    Fraction(2),
    Fraction(1, 2),
    Fraction(4, 3),
    Fraction(3, 4),
    Fraction(3),
    Fraction(1, 3),
    Fraction(5, 2),
    Fraction(2, 5),
)

PERMUTATION_BUDGET = 1000

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


@lru_cache(maxsize=8)
def _read_catalog(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            catalog = json.load(f)
    except FileNotFoundError:
        raise QAError(ErrorCode.QA_TEMPLATE_NOT_FOUND, f"Template catalog not found: {path}")
    except json.JSONDecodeError as e:
        raise QAError(ErrorCode.QA_TEMPLATE_NOT_FOUND, f"Template catalog is not valid JSON: {e}")
    if catalog.get("version") != EXPECTED_CATALOG_VERSION:
        raise QAError(
            ErrorCode.QA_TEMPLATE_NOT_FOUND,
            f"Template catalog version {catalog.get('version')} (expected {EXPECTED_CATALOG_VERSION})",
        )
    return catalog


def load_catalog(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Load a template catalog; None loads the packaged default."""
    return _read_catalog(str(path or DEFAULT_CATALOG))


def default_template(facts: TaskFacts) -> str:
    if isinstance(facts, SpatialTaskFacts):
        return "spatial.occlusion" if facts.task == "occlusion" else "spatial.relation"
    if isinstance(facts, SequenceTaskFacts):
        return "sequential.order"
    return "analytical.scale_chain"


def get_template(catalog: Dict[str, Any], template_id: str, facts: TaskFacts) -> Dict[str, Any]:
    """
    Look up a template and check it fits the facts.

    Raises:
        QAError(QA_TEMPLATE_NOT_FOUND): unknown template id
        QAError(QA_TEMPLATE_INCOMPATIBLE): template is for another category or task
    """
    template = catalog.get("templates", {}).get(template_id)
    if template is None:
        raise QAError(ErrorCode.QA_TEMPLATE_NOT_FOUND, f"Unknown template: {template_id}")
    if template["category"] != facts.category or template["task"] != facts.task:
        raise QAError(
            ErrorCode.QA_TEMPLATE_INCOMPATIBLE,
            f"{template_id} expects {template['category']}/{template['task']}, got {facts.category}/{facts.task}",
        )
    return template


# --- phrasing helpers ------------------------------------------------------


def join_phrases(items: Sequence[str]) -> str:
    """"a", "a and b", "a, b and c"."""
    items = list(items)
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def _capitalize(text: str) -> str:
    return text[:1].upper() + text[1:]


def _image_list(indices: Sequence[int]) -> str:
    return join_phrases([f"image{k}" for k in indices])


def outline_word(primitive: Primitive, view, catalog: Dict[str, Any]) -> str:
    outline = primitive.silhouette(view)
    if isinstance(outline, Rect) and outline.half_w == outline.half_h:
        return catalog["outlines"]["square"]
    return catalog["outlines"][outline.kind]


def fact_text(fact: RelationFact, label: Callable[[str], str]) -> str:
    """Canonical form of a relation fact, e.g. "right-of(red cube, blue cone)"."""
    args = [label(fact.subject), label(fact.object)]
    if fact.view is not None:
        args.append(fact.view.value)
    return f"{fact.relation.value}({', '.join(args)})"


def relation_statement(fact: RelationFact, label: Callable[[str], str], catalog: Dict[str, Any]) -> str:
    return catalog["relations"][fact.relation.value].format(
        subject=label(fact.subject),
        object=label(fact.object),
        view=fact.view.value if fact.view else "",
    )


def order_text(order: Sequence[int]) -> str:
    """0-based image positions in chronological order -> "image2, image3, image1"."""
    return ", ".join(f"image{i + 1}" for i in order)


def heading_words(heading: Tuple[int, int]) -> str:
    dx, dy = heading
    parts = []
    if dy:
        parts.append("up" if dy > 0 else "down")
    if dx:
        parts.append("to the right" if dx > 0 else "to the left")
    return " and ".join(parts)


def _places(plans: Sequence[ImagePlan], primitive_id_or_label: str, by_label: bool = False) -> List[int]:
    found = []
    for k, plan in enumerate(plans, start=1):
        shown = plan.in_frame()
        if any((p.label if by_label else p.id) == primitive_id_or_label for p in shown):
            found.append(k)
    return found


# --- distractors -----------------------------------------------------------


def numeric_distractors(value: Fraction, link_ratios: Sequence[Fraction]) -> List[Fraction]:
    """
    Three wrong multipliers: x2/3, x3/2, then the first usable link ratio.

    Collisions are resolved with NUMERIC_FALLBACKS multiples.

    Raises:
        QAError(QA_DISTRACTOR_COLLISION): fewer than 3 distinct wrong values
    """
    picks: List[Fraction] = []

    def offer(candidate: Fraction) -> bool:
        if candidate > 0 and candidate != value and candidate not in picks:
            picks.append(candidate)
            return True
        return False

    offer(value * Fraction(2, 3))
    offer(value * Fraction(3, 2))
    for ratio in link_ratios:
        if offer(ratio):
            break
    for factor in NUMERIC_FALLBACKS:
        if len(picks) >= 3:
            break
        offer(value * factor)

    if len(picks) < 3:
        raise QAError(ErrorCode.QA_DISTRACTOR_COLLISION, f"only {len(picks)} distinct wrong values for {value}")
    return picks[:3]


def permutation_distractors(
    correct: Tuple[int, ...], rng: np.random.Generator, budget: int = PERMUTATION_BUDGET
) -> List[Tuple[int, ...]]:
    """
    Three random orderings that are neither the identity nor the correct one.

    Raises:
        QAError(QA_DISTRACTOR_COLLISION): budget spent first
    """
    identity = tuple(range(len(correct)))
    picks: List[Tuple[int, ...]] = []
    for _ in range(budget):
        candidate = tuple(int(i) for i in rng.permutation(len(correct)))
        if candidate not in (identity, correct) and candidate not in picks:
            picks.append(candidate)
            if len(picks) == 3:
                return picks
    raise QAError(ErrorCode.QA_DISTRACTOR_COLLISION, f"no 3 distinct wrong orderings of {len(correct)} images")


def fisher_yates(n: int, rng: np.random.Generator) -> List[int]:
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(i + 1))
        order[i], order[j] = order[j], order[i]
    return order


# --- MCQ -------------------------------------------------------------------


def _spatial_options(facts: SpatialTaskFacts, catalog) -> Tuple[List[Any], List[str]]:
    truth = set(spatial_relations(facts.scene))
    for wrong in facts.distractors:
        if wrong in truth:
            raise QAError(ErrorCode.QA_DISTRACTOR_COLLISION, f"distractor holds in the scene: {wrong}")
    payloads = [facts.queried, *facts.distractors]
    texts = [_capitalize(relation_statement(f, facts.label, catalog)) for f in payloads]
    return payloads, texts


def _sequence_options(facts: SequenceTaskFacts, rng) -> Tuple[List[Any], List[str]]:
    payloads = [facts.inverse, *permutation_distractors(facts.inverse, rng)]
    return payloads, [order_text(p) for p in payloads]


def _scale_options(facts: ScaleChainFacts) -> Tuple[List[Any], List[str]]:
    payloads = [facts.multiplier, *numeric_distractors(facts.multiplier, [link.ratio for link in facts.links])]
    return payloads, [format_ratio(p) for p in payloads]


def _unknown_placeholder(template_id: str, e: Exception) -> QAError:
    return QAError(ErrorCode.QA_TEMPLATE_INCOMPATIBLE, f"{template_id} uses a placeholder this task does not fill: {e}")


def _question(facts: TaskFacts, template: Dict[str, Any]) -> str:
    n = len(facts.images)
    if isinstance(facts, SpatialTaskFacts):
        return template["question"].format(
            n=n,
            count=len(facts.scene.primitives),
            subject=facts.label(facts.queried.subject),
            object=facts.label(facts.queried.object),
        )
    if isinstance(facts, SequenceTaskFacts):
        return template["question"].format(n=n, mover=facts.mover.label, heading=heading_words(facts.heading))
    source, target = facts.query
    return template["question"].format(n=n, source=source, target=target)


def build_mcq(
    facts: TaskFacts,
    template_id: Optional[str] = None,
    seed: int = 0,
    catalog: Optional[Dict[str, Any]] = None,
) -> MCQ:
    """
    Build the MCQ for a set of task facts.

    The correct option comes from the facts' ground truth; the three wrong
    ones follow the category's distractor strategy. Option order is a seeded
    Fisher-Yates shuffle, so (facts, template, seed) fix the MCQ completely.

    Raises:
        QAError: template missing/incompatible, or distractor collision.
    """
    catalog = catalog or load_catalog()
    template_id = template_id or default_template(facts)
    template = get_template(catalog, template_id, facts)
    rng = make_rng(seed, "mcq")

    if isinstance(facts, SpatialTaskFacts):
        payloads, texts = _spatial_options(facts, catalog)
    elif isinstance(facts, SequenceTaskFacts):
        payloads, texts = _sequence_options(facts, rng)
    else:
        payloads, texts = _scale_options(facts)

    if len(set(texts)) != len(OPTION_KEYS):
        raise QAError(ErrorCode.QA_DISTRACTOR_COLLISION, "options are not pairwise distinct")

    order = fisher_yates(len(OPTION_KEYS), rng)
    options = {key: texts[order[i]] for i, key in enumerate(OPTION_KEYS)}
    answer = OPTION_KEYS[order.index(0)]
    try:
        question = _question(facts, template)
    except (KeyError, IndexError) as e:
        raise _unknown_placeholder(template_id, e)
    return MCQ(
        question=question,
        options=options,
        answer=answer,
        payloads=tuple(payloads[i] for i in order),
    )


def option_holds(facts: TaskFacts, payload: Any) -> bool:
    """Facts oracle: does this option's payload describe the ground truth?"""
    if isinstance(facts, SpatialTaskFacts):
        return payload in set(spatial_relations(facts.scene))
    if isinstance(facts, SequenceTaskFacts):
        # Timesteps seen when reading images in this order must count up
        return [facts.shuffle[i] for i in payload] == list(range(len(facts.shuffle)))
    return payload == chain_product([link.ratio for link in facts.links])


def verify_mcq(facts: TaskFacts, mcq: MCQ) -> None:
    """
    Re-check an MCQ against its facts.

    Raises:
        QAError(QA_VALIDATION_FAILURE): the keyed option is false or a wrong option holds.
    """
    if len(mcq.payloads) != len(OPTION_KEYS):
        raise QAError(ErrorCode.QA_VALIDATION_FAILURE, "mcq carries no option payloads")
    for key in OPTION_KEYS:
        holds = option_holds(facts, mcq.payload(key))
        if key == mcq.answer and not holds:
            raise QAError(ErrorCode.QA_VALIDATION_FAILURE, f"keyed option {key} contradicts the facts")
        if key != mcq.answer and holds:
            raise QAError(ErrorCode.QA_VALIDATION_FAILURE, f"wrong option {key} holds in the facts")


# --- reasoning steps -------------------------------------------------------


def _spatial_steps(facts: SpatialTaskFacts, mcq: MCQ, template, catalog) -> ReasoningSteps:
    plans = facts.images
    q = facts.queried
    label = facts.label
    n_views = sum(1 for p in plans if p.role == "view")

    summary = template["summary"].format(subject=label(q.subject), object=label(q.object), n_views=n_views)

    captions = []
    for k, plan in enumerate(plans, start=1):
        objects = join_phrases([f"the {p.label}" for p in plan.in_frame()])
        view_desc = catalog["views"][plan.view.value]
        if plan.role == "closeup":
            focus = plan.primitive(plan.detail["focus"]).label
            captions.append(template["caption"]["closeup"].format(k=k, view_desc=view_desc, focus=focus, objects=objects))
        else:
            captions.append(template["caption"]["view"].format(k=k, view_desc=view_desc, objects=objects))

    binds = []
    for pid in (q.subject, q.object):
        prim = facts.scene.get(pid)
        groups: Dict[str, List[int]] = {}
        for k in _places(plans, pid):
            groups.setdefault(outline_word(prim, plans[k - 1].view, catalog), []).append(k)
        for word, indices in groups.items():
            binds.append(
                template["bind"].format(label=prim.label, color=prim.color, outline=word, places=_image_list(indices))
            )

    evidence_views = set(fact_views(q))
    k = next(i for i, p in enumerate(plans, start=1) if p.role == "view" and p.view in evidence_views)
    subject, obj = facts.scene.get(q.subject), facts.scene.get(q.object)
    statement = relation_statement(q, label, catalog)
    if q.relation == Relation.OCCLUDES_IN_VIEW:
        relate = template["relate"]["occlusion"].format(
            k=k,
            view=q.view.value,
            subject=subject.label,
            object=obj.label,
            a=f"{subject.depth(q.view):.2f}",
            b=f"{obj.depth(q.view):.2f}",
            fact=fact_text(q, label),
            statement=statement,
        )
    else:
        axis = AXIS_OF[q.relation]
        relate = template["relate"]["axis"].format(
            k=k,
            view=plans[k - 1].view.value,
            subject=subject.label,
            object=obj.label,
            axis=axis,
            a=f"{subject.center[_AXIS_INDEX[axis]]:.2f}",
            b=f"{obj.center[_AXIS_INDEX[axis]]:.2f}",
            fact=fact_text(q, label),
            statement=statement,
        )

    conclusion = template["conclusion"].format(statement=statement, key=mcq.answer, answer_text=mcq.answer_text)
    return ReasoningSteps(summary, " ".join(captions), " ".join(binds), relate, conclusion)


def _sequence_steps(facts: SequenceTaskFacts, mcq: MCQ, template, catalog) -> ReasoningSteps:
    n = len(facts.images)
    mover = facts.mover.label
    landmarks = join_phrases([f"the {m.label}" for m in facts.landmarks]) or "no other objects"
    all_images = _image_list(range(1, n + 1))

    summary = template["summary"].format(n=n, mover=mover)
    captions = []
    for k, t in enumerate(facts.shuffle, start=1):
        x, y = facts.positions[t]
        captions.append(template["caption"]["frame"].format(k=k, mover=mover, x=x, y=y, landmarks=landmarks))

    plan = facts.images[0]
    binds = [
        template["bind"]["mover"].format(
            label=mover,
            color=facts.mover.color,
            outline=outline_word(facts.mover, plan.view, catalog),
            places=all_images,
        )
    ]
    for m in facts.landmarks:
        binds.append(
            template["bind"]["landmark"].format(
                label=m.label,
                color=m.color,
                outline=outline_word(m, plan.view, catalog),
                x=int(m.center[0]),
                y=int(m.center[1]),
                places=all_images,
            )
        )

    inverse = facts.inverse
    relates = [template["relate"]["start"].format(heading=heading_words(facts.heading), k=inverse[0] + 1)]
    for t, (dx, dy) in enumerate(facts.offsets):
        relates.append(
            template["relate"]["step"].format(a=inverse[t] + 1, b=inverse[t + 1] + 1, mover=mover, dx=dx, dy=dy)
        )

    conclusion = template["conclusion"].format(order=order_text(inverse), key=mcq.answer, answer_text=mcq.answer_text)
    return ReasoningSteps(summary, " ".join(captions), " ".join(binds), " ".join(relates), conclusion)


def _scale_steps(facts: ScaleChainFacts, mcq: MCQ, template, catalog) -> ReasoningSteps:
    plans = facts.images
    source, target = facts.query
    summary = template["summary"].format(source=source, target=target)

    captions = []
    for k, plan in enumerate(plans, start=1):
        if plan.role == "link":
            left, right = (p.label for p in plan.primitives)
            captions.append(template["caption"]["link"].format(k=k, left=left, right=right))
        else:
            captions.append(template["caption"]["decoy"].format(k=k, label=plan.primitives[0].label))

    chain_labels = [facts.links[0].smaller] + [link.larger for link in facts.links]
    binds = []
    for name in chain_labels:
        places = _places(plans, name, by_label=True)
        prim = next(p for p in plans[places[0] - 1].primitives if p.label == name)
        binds.append(
            template["bind"]["object"].format(
                label=name,
                color=prim.color,
                outline=outline_word(prim, plans[places[0] - 1].view, catalog),
                places=_image_list(places),
            )
        )
    for k, plan in enumerate(plans, start=1):
        if plan.role == "decoy":
            binds.append(template["bind"]["decoy"].format(k=k))

    relates = [
        template["relate"]["link"].format(
            k=link.image_index, larger=link.larger, smaller=link.smaller, ratio=format_ratio(link.ratio)
        )
        for link in facts.links
    ]

    conclusion = template["conclusion"].format(
        product=" × ".join(format_ratio(link.ratio) for link in facts.links),
        value=format_ratio(facts.multiplier),
        source=source,
        target=target,
        key=mcq.answer,
        answer_text=mcq.answer_text,
    )
    return ReasoningSteps(summary, " ".join(captions), " ".join(binds), " ".join(relates), conclusion)


def annotate_reasoning(
    facts: TaskFacts,
    mcq: MCQ,
    template_id: Optional[str] = None,
    catalog: Optional[Dict[str, Any]] = None,
) -> ReasoningSteps:
    """
    Fill the five reasoning steps from ground truth.

    summary restates the intent, caption describes every image, text2region
    binds each noun phrase of the question to image indices, region2region
    states the cross-image relations used, conclusion derives the keyed answer.
    """
    catalog = catalog or load_catalog()
    template_id = template_id or default_template(facts)
    template = get_template(catalog, template_id, facts)
    try:
        if isinstance(facts, SpatialTaskFacts):
            return _spatial_steps(facts, mcq, template, catalog)
        if isinstance(facts, SequenceTaskFacts):
            return _sequence_steps(facts, mcq, template, catalog)
        return _scale_steps(facts, mcq, template, catalog)
    except (KeyError, IndexError) as e:
        raise _unknown_placeholder(template_id, e)


# --- instances -------------------------------------------------------------


def _fail(why: str) -> QAError:
    return QAError(ErrorCode.QA_VALIDATION_FAILURE, why)


def _mentions(text: str, k: int) -> bool:
    return re.search(rf"\bimage{k}\b", text) is not None


def validate_instance(instance: Instance) -> None:
    """
    Check every Instance invariant.

    Raises:
        QAError(QA_VALIDATION_FAILURE): message names the violated invariant,
            e.g. "options not distinct" or "reasoning.text2region empty".
    """
    if not instance.id:
        raise _fail("id empty")
    if instance.category not in CATEGORIES:
        raise _fail(f"unknown category {instance.category!r}")

    indices = [s.index for s in instance.segments if s.kind == "image"]
    if len(indices) < 2:
        raise _fail("fewer than 2 images")
    if indices != list(range(1, len(indices) + 1)):
        raise _fail("image indices not consecutive")
    lead_text = " ".join(s.text or "" for s in instance.segments if s.kind == "text")
    for k in indices:
        if not _mentions(lead_text, k):
            raise _fail(f"image{k} not referenced in text segments")

    mcq = instance.mcq
    if not mcq.question.strip():
        raise _fail("question empty")
    if tuple(mcq.options) != OPTION_KEYS:
        raise _fail("options must be keyed A-D")
    if len(set(mcq.options.values())) != len(OPTION_KEYS):
        raise _fail("options not distinct")
    if mcq.answer not in mcq.options:
        raise _fail("answer key missing")

    for name in STEP_NAMES:
        if not getattr(instance.reasoning, name).strip():
            raise _fail(f"reasoning.{name} empty")
    for k in indices:
        if not (_mentions(instance.reasoning.caption, k) or _mentions(instance.reasoning.text2region, k)):
            raise _fail(f"image{k} missing from caption and text2region")
    if mcq.answer_text not in instance.reasoning.conclusion:
        raise _fail("conclusion does not state the answer")


def assemble_instance(
    facts: TaskFacts,
    mcq: MCQ,
    reasoning: ReasoningSteps,
    instance_id: str,
    image_format: Union[ImageFormat, str] = ImageFormat.PNG,
    provenance: Optional[Dict[str, Any]] = None,
    catalog: Optional[Dict[str, Any]] = None,
) -> Instance:
    """
    Interleave one text lead-in per image with the images, then the question.

    Raises:
        QAError(QA_VALIDATION_FAILURE): the assembled instance breaks an invariant.
    """
    catalog = catalog or load_catalog()
    segments: List[Segment] = []
    for k, plan in enumerate(facts.images, start=1):
        lead = catalog["lead_ins"][plan.role].format(k=k, view=plan.view.value)
        segments.append(Segment(kind="text", text=lead))
        segments.append(Segment(kind="image", image=f"images/{image_filename(instance_id, k, image_format)}", index=k))
    segments.append(Segment(kind="text", text=mcq.question))

    instance = Instance(
        id=instance_id,
        category=facts.category,
        task=facts.task,
        segments=tuple(segments),
        mcq=mcq,
        reasoning=reasoning,
        provenance=dict(provenance or {}),
    )
    validate_instance(instance)
    return instance


def make_instance(
    facts: TaskFacts,
    instance_id: str,
    seed: int,
    image_format: Union[ImageFormat, str] = ImageFormat.PNG,
    template_id: Optional[str] = None,
    catalog: Optional[Dict[str, Any]] = None,
    provenance: Optional[Dict[str, Any]] = None,
) -> Instance:
    """build_mcq -> annotate_reasoning -> assemble_instance, re-checked against the facts oracle."""
    catalog = catalog or load_catalog()
    mcq = build_mcq(facts, template_id, seed, catalog)
    verify_mcq(facts, mcq)
    reasoning = annotate_reasoning(facts, mcq, template_id, catalog)
    provenance = dict(provenance or {})
    provenance.setdefault("template", template_id or default_template(facts))
    return assemble_instance(facts, mcq, reasoning, instance_id, image_format, provenance, catalog)
