"""
MCQ prediction scoring.

Raw model outputs are matched to an option key (rule cascade, optionally an
external matching service), then scored per category. Unmatched outputs
count as wrong and are reported separately so matcher quality stays visible.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .config import CATEGORIES
from .errors import ErrorCode, EvalError, MatcherError
from .logging import get_logger
from .matching import AnswerMatcher, extract_key
from .models import Instance

logger = get_logger("evaluation")


class MatchMethod(str, Enum):
    RULE = "rule"
    EXTERNAL = "external"
    UNMATCHED = "unmatched"


@dataclass(frozen=True)
class Prediction:
    question_id: str
    raw_output: str
    key: Optional[str]
    method: MatchMethod

    def __post_init__(self):
        if (self.key is not None) != (self.method != MatchMethod.UNMATCHED):
            raise EvalError(
                ErrorCode.EVAL_INVALID_PREDICTION,
                f"{self.question_id}: key must be set exactly when the method is not unmatched",
            )

    def to_dict(self) -> Dict[str, Any]:
        return {"question_id": self.question_id, "key": self.key, "method": self.method.value}


@dataclass(frozen=True)
class GoldItem:
    question_id: str
    category: str
    answer: str
    options: Dict[str, str]
    question: str = ""

    @classmethod
    def from_instance(cls, instance: Instance) -> "GoldItem":
        return cls(
            question_id=instance.id,
            category=instance.category,
            answer=instance.answer,
            options=dict(instance.mcq.options),
            question=instance.question,
        )


@dataclass(frozen=True)
class CategoryScore:
    correct: int
    total: int

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.correct, self.total) if self.total else Fraction(0)


@dataclass(frozen=True)
class ScoreReport:
    per_category: Dict[str, CategoryScore]
    unmatched: int
    predictions: Tuple[Prediction, ...] = field(default=(), compare=False, repr=False)

    @property
    def correct(self) -> int:
        return sum(s.correct for s in self.per_category.values())

    @property
    def total(self) -> int:
        return sum(s.total for s in self.per_category.values())

    @property
    def overall(self) -> Fraction:
        return Fraction(self.correct, self.total) if self.total else Fraction(0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall": float(self.overall),
            "correct": self.correct,
            "total": self.total,
            "unmatched": self.unmatched,
            "per_category": {
                name: {"correct": s.correct, "total": s.total, "accuracy": float(s.accuracy)}
                for name, s in self.per_category.items()
            },
        }

    def format_table(self) -> str:
        """Aligned plain-text table: category, correct, total, accuracy."""
        rows = [(name, s.correct, s.total, s.accuracy) for name, s in self.per_category.items()]
        rows.append(("overall", self.correct, self.total, self.overall))
        width = max(len("category"), *(len(r[0]) for r in rows))
        lines = [f"{'category':<{width}}  {'correct':>7}  {'total':>5}  {'accuracy':>8}"]
        for name, correct, total, acc in rows:
            lines.append(f"{name:<{width}}  {correct:>7}  {total:>5}  {float(acc):>8.4f}")
        lines.append(f"unmatched: {self.unmatched}")
        return "\n".join(lines)


def match_answer(raw: str, options: Dict[str, str]) -> Tuple[Optional[str], MatchMethod]:
    """Rule cascade; never raises."""
    key = extract_key(raw, options)
    return (key, MatchMethod.RULE) if key else (None, MatchMethod.UNMATCHED)


def match_answer_external(
    raw: str,
    options: Dict[str, str],
    matcher: AnswerMatcher,
    question: str = "",
) -> Tuple[Optional[str], MatchMethod]:
    """
    Ask an external matcher; fall back to the rule cascade if it fails.

    A service answer of "none" is unmatched, not a failure.
    """
    try:
        key = matcher.match(raw, options, question)
    except MatcherError as e:
        logger.warning("External matcher failed (%s); using rule-based result", e)
        return match_answer(raw, options)
    return (key, MatchMethod.EXTERNAL) if key else (None, MatchMethod.UNMATCHED)


def parse_prediction_rows(rows: Iterable[Dict[str, Any]]) -> List[Tuple[str, str]]:
    """
    Validate predictions JSONL rows {question_id, output}.

    Raises:
        EvalError(EVAL_INVALID_PREDICTION): row lacks a field or has the wrong type
        EvalError(EVAL_DUPLICATE_PREDICTION): two rows for one question
    """
    parsed = []
    seen = set()
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, dict):
            raise EvalError(ErrorCode.EVAL_INVALID_PREDICTION, f"row {i}: expected an object")
        qid, output = row.get("question_id"), row.get("output")
        if not isinstance(qid, str) or not isinstance(output, str):
            raise EvalError(ErrorCode.EVAL_INVALID_PREDICTION, f"row {i}: need string question_id and output")
        if qid in seen:
            raise EvalError(ErrorCode.EVAL_DUPLICATE_PREDICTION, qid)
        seen.add(qid)
        parsed.append((qid, output))
    return parsed


def match_predictions(
    rows: Sequence[Tuple[str, str]],
    gold: Dict[str, GoldItem],
    matcher: Optional[AnswerMatcher] = None,
    max_in_flight: int = 4,
) -> List[Prediction]:
    """
    Turn (question_id, raw output) pairs into Predictions.

    With an external matcher, at most `max_in_flight` requests run at once.

    Raises:
        EvalError(EVAL_UNKNOWN_QUESTION_ID): a prediction has no gold item
    """
    for qid, _ in rows:
        if qid not in gold:
            raise EvalError(ErrorCode.EVAL_UNKNOWN_QUESTION_ID, qid)

    def one(row: Tuple[str, str]) -> Prediction:
        qid, raw = row
        item = gold[qid]
        if matcher is None:
            key, method = match_answer(raw, item.options)
        else:
            key, method = match_answer_external(raw, item.options, matcher, item.question)
        return Prediction(qid, raw, key, method)

    if matcher is None:
        return [one(row) for row in rows]
    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        return list(pool.map(one, rows))


def score(predictions: Sequence[Prediction], gold: Sequence[GoldItem]) -> ScoreReport:
    """
    Per-category and overall accuracy.

    Gold items without a prediction count as unmatched.

    Raises:
        EvalError(EVAL_UNKNOWN_QUESTION_ID): prediction for an id not in gold
        EvalError(EVAL_DUPLICATE_PREDICTION): two predictions for one id
    """
    gold_ids = {g.question_id for g in gold}
    by_id: Dict[str, Prediction] = {}
    for p in predictions:
        if p.question_id not in gold_ids:
            raise EvalError(ErrorCode.EVAL_UNKNOWN_QUESTION_ID, p.question_id)
        if p.question_id in by_id:
            raise EvalError(ErrorCode.EVAL_DUPLICATE_PREDICTION, p.question_id)
        by_id[p.question_id] = p

    tallies: Dict[str, List[int]] = {}
    unmatched = 0
    for item in gold:
        tally = tallies.setdefault(item.category, [0, 0])
        tally[1] += 1
        pred = by_id.get(item.question_id)
        if pred is None or pred.key is None:
            unmatched += 1
        elif pred.key == item.answer:
            tally[0] += 1

    known = [c for c in CATEGORIES if c in tallies]
    extra = sorted(c for c in tallies if c not in CATEGORIES)
    per_category = {c: CategoryScore(*tallies[c]) for c in known + extra}
    return ScoreReport(per_category=per_category, unmatched=unmatched, predictions=tuple(predictions))
