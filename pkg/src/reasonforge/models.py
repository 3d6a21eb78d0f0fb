"""
Data models for benchmark instances.

An Instance is one interleaved multi-image item: ordered text/image segments,
a four-option MCQ, five reasoning steps and provenance. These dataclasses
match the instances.jsonl schema documented in docs/schemas.md; to_dict /
from_dict are the only (de)serialization path.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .errors import ErrorCode, QAError

OPTION_KEYS = ("A", "B", "C", "D")

# s1..s5 in order
STEP_NAMES = ("summary", "caption", "text2region", "region2region", "conclusion")


@dataclass(frozen=True)
class Segment:
    """One piece of interleaved content."""
    kind: str  # "text" or "image"
    text: Optional[str] = None  # text segments only
    image: Optional[str] = None  # image segments: relative path, e.g. "images/rf-000001_img2.png"
    index: Optional[int] = None  # image segments: 1-based position among the instance's images

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "text":
            return {"type": "text", "text": self.text}
        return {"type": "image", "image": self.image, "index": self.index}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Segment":
        if data.get("type") == "text":
            return cls(kind="text", text=data["text"])
        return cls(kind="image", image=data["image"], index=int(data["index"]))


@dataclass(frozen=True)
class MCQ:
    """
    Four-option multiple-choice question.

    `payloads` holds the ground-truth object behind each option (a
    RelationFact, a permutation tuple or a Fraction) aligned with A..D. It is
    used for oracle checks and never serialized.
    """
    question: str
    options: Dict[str, str]
    answer: str
    payloads: Tuple[Any, ...] = field(default=(), compare=False, repr=False)

    @property
    def answer_text(self) -> str:
        return self.options[self.answer]

    def payload(self, key: str) -> Any:
        return self.payloads[OPTION_KEYS.index(key)]


@dataclass(frozen=True)
class ReasoningSteps:
    summary: str
    caption: str
    text2region: str
    region2region: str
    conclusion: str

    def as_list(self) -> List[str]:
        return [getattr(self, name) for name in STEP_NAMES]

    def to_dict(self) -> Dict[str, str]:
        return {name: getattr(self, name) for name in STEP_NAMES}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReasoningSteps":
        return cls(**{name: str(data.get(name) or "") for name in STEP_NAMES})


@dataclass(frozen=True)
class Instance:
    id: str
    category: str
    task: str
    segments: Tuple[Segment, ...]
    mcq: MCQ
    reasoning: ReasoningSteps
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def images(self) -> List[str]:
        return [s.image for s in self.segments if s.kind == "image"]

    @property
    def question(self) -> str:
        return self.mcq.question

    @property
    def answer(self) -> str:
        return self.mcq.answer

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "category": self.category,
            "task": self.task,
            "segments": [s.to_dict() for s in self.segments],
            "images": self.images,
            "question": self.mcq.question,
            "options": dict(self.mcq.options),
            "answer": self.mcq.answer,
            "reasoning": self.reasoning.to_dict(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Instance":
        """
        Parse one instances.jsonl row.

        Raises:
            QAError(QA_VALIDATION_FAILURE): a required field is missing or mistyped.
        """
        try:
            return cls(
                id=str(data["id"]),
                category=str(data["category"]),
                task=str(data["task"]),
                segments=tuple(Segment.from_dict(s) for s in data["segments"]),
                mcq=MCQ(
                    question=str(data["question"]),
                    options={str(k): str(v) for k, v in data["options"].items()},
                    answer=str(data["answer"]),
                ),
                reasoning=ReasoningSteps.from_dict(data.get("reasoning") or {}),
                provenance=dict(data.get("provenance") or {}),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise QAError(ErrorCode.QA_VALIDATION_FAILURE, f"malformed instance record: {e}")
