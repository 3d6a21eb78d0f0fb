"""
Adaptive difficulty filter and stage-wise curriculum construction.

1. Trial logs from repeated inference (default 10 trials per question) are
   aggregated into TrialLog tallies.
2. classify_difficulty() splits questions by correct rate p = c/n:
   Simple if p >= threshold (0.7 by default), Challenging otherwise.
3. Simple instances make up stage 0. For stages k = 1..5 a fresh seeded
   sample of the Challenging pool is transformed so that the trailing k
   reasoning steps move from the input into the target.

Steps are joined with a newline and a fixed header line ("[SUMMARY]", ...),
which keeps the input/target split exact and machine-checkable.
"""

import re
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import CurriculumError, ErrorCode
from .logging import get_logger
from .models import OPTION_KEYS, STEP_NAMES, Instance
from .utils import as_fraction, make_rng, round_half_up, write_jsonl

DEFAULT_THRESHOLD = Fraction(7, 10)
DEFAULT_FRACTION = Fraction(2, 5)
DEFAULT_TRIALS = 10
N_STEPS = len(STEP_NAMES)

# "figure": the conclusion never sits in the input, stages 1..5.
# "equation": stage 1 input carries all five steps, target is the answer alone, stages 1..6.
VARIANT_STAGES = {"figure": N_STEPS, "equation": N_STEPS + 1}

ANSWER_HEADER = "[ANSWER]"
_HEADER_RE = re.compile(r"^\[(SUMMARY|CAPTION|TEXT2REGION|REGION2REGION|CONCLUSION|ANSWER)\]$")

logger = get_logger("curriculum")


class Difficulty(str, Enum):
    SIMPLE = "Simple"
    CHALLENGING = "Challenging"


@dataclass(frozen=True)
class TrialLog:
    question_id: str
    n: int = DEFAULT_TRIALS
    c: int = 0

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.c <= self.n:
            raise CurriculumError(
                ErrorCode.CURRICULUM_INVALID_LOG,
                f"{self.question_id}: need n >= 1 and 0 <= c <= n, got c={self.c} n={self.n}",
            )


@dataclass(frozen=True)
class DifficultyRecord:
    question_id: str
    c: int
    n: int
    p: Fraction
    difficulty: Difficulty

    def to_dict(self) -> Dict[str, Any]:
        return {
            "question_id": self.question_id,
            "c": self.c,
            "n": self.n,
            "p": str(self.p),
            "class": self.difficulty.value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DifficultyRecord":
        if not isinstance(data, dict):
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, "malformed difficulty record: expected an object")
        try:
            return cls(
                question_id=str(data["question_id"]),
                c=int(data["c"]),
                n=int(data["n"]),
                p=Fraction(str(data["p"])),
                difficulty=Difficulty(data["class"]),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, f"malformed difficulty record: {e}")


@dataclass(frozen=True)
class StageSample:
    id: str
    stage: int
    input: str
    target: str
    images: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "stage": self.stage,
            "input": self.input,
            "target": self.target,
            "images": list(self.images),
        }


@dataclass(frozen=True)
class StageFile:
    stage: int
    path: Path
    rows: int


# --- trial logs and difficulty ---------------------------------------------


def aggregate_trial_logs(rows: Iterable[Dict[str, Any]], model_id: Optional[str] = None) -> List[TrialLog]:
    """
    Tally raw trial rows {question_id, model_id, trial_index, predicted, correct}.

    With model_id set, rows from other models are ignored. Output keeps the
    order in which question ids first appear.

    Raises:
        CurriculumError(CURRICULUM_INVALID_LOG): malformed or duplicated trial row
    """
    tallies: "OrderedDict[str, List[int]]" = OrderedDict()
    seen = set()
    for i, row in enumerate(rows, start=1):
        if not isinstance(row, dict):
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, f"row {i}: expected an object")
        try:
            qid = str(row["question_id"])
            model = str(row.get("model_id", ""))
            trial = int(row["trial_index"])
            correct = row["correct"]
        except (KeyError, TypeError, ValueError) as e:
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, f"row {i}: {e}")
        if not isinstance(correct, bool):
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, f"row {i}: correct must be true or false")
        if model_id is not None and model != model_id:
            continue
        key = (qid, model, trial)
        if key in seen:
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, f"row {i}: duplicate trial {key}")
        seen.add(key)
        tally = tallies.setdefault(qid, [0, 0])
        tally[0] += 1
        tally[1] += int(correct)

    return [TrialLog(question_id=qid, n=n, c=c) for qid, (n, c) in tallies.items()]


def classify_difficulty(
    logs: Sequence[TrialLog], threshold: Union[Fraction, float, str] = DEFAULT_THRESHOLD
) -> List[DifficultyRecord]:
    """
    Simple if c/n >= threshold, else Challenging.

    Comparison is exact on rationals, so 7/10 against 0.7 lands on Simple.

    Raises:
        CurriculumError(CURRICULUM_DUPLICATE_QUESTION_ID): an id appears twice
        CurriculumError(CURRICULUM_INVALID_LOG): no logs
    """
    if not logs:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_LOG, "no trial logs to classify")
    threshold = as_fraction(threshold)
    if not 0 < threshold <= 1:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_FRACTION, f"threshold must lie in (0, 1], got {threshold}")

    records = []
    seen = set()
    for log in logs:
        if log.question_id in seen:
            raise CurriculumError(ErrorCode.CURRICULUM_DUPLICATE_QUESTION_ID, log.question_id)
        seen.add(log.question_id)
        p = Fraction(log.c, log.n)
        difficulty = Difficulty.SIMPLE if p >= threshold else Difficulty.CHALLENGING
        records.append(DifficultyRecord(log.question_id, log.c, log.n, p, difficulty))
    return records


# --- stage transform -------------------------------------------------------


def step_block(name: str, text: str) -> str:
    return f"[{name.upper()}]\n{text}"


def question_block(instance: Instance) -> str:
    """Q: the question followed by its lettered options."""
    lines = [instance.mcq.question]
    lines.extend(f"{key}. {instance.mcq.options[key]}" for key in OPTION_KEYS)
    return "\n".join(lines)


def answer_block(instance: Instance) -> str:
    return f"{ANSWER_HEADER}\n{instance.mcq.answer}. {instance.mcq.answer_text}"


def split_blocks(text: str) -> Tuple[str, List[Tuple[str, str]]]:
    """
    Undo the header join: (leading text, [(step name, body), ...]).

    Names come back lower-case ("summary", ..., "answer").
    """
    lead: List[str] = []
    blocks: List[Tuple[str, List[str]]] = []
    for line in text.split("\n"):
        match = _HEADER_RE.match(line)
        if match:
            blocks.append((match.group(1).lower(), []))
        elif blocks:
            blocks[-1][1].append(line)
        else:
            lead.append(line)
    return "\n".join(lead), [(name, "\n".join(body)) for name, body in blocks]


def _steps(instance: Instance) -> List[str]:
    steps = instance.reasoning.as_list()
    for name, text in zip(STEP_NAMES, steps):
        if not text or not text.strip():
            raise CurriculumError(ErrorCode.CURRICULUM_MISSING_STEP, name)
    return steps


def stage_transform(instance: Instance, k: int, variant: str = "figure") -> StageSample:
    """
    Move the trailing reasoning steps from input to target.

    figure (default, stages 1..5): input = Q + s1..s(5-k), target = s(6-k)..s5.
    equation (stages 1..6): input = Q + s1..s(6-k), target = s(7-k)..s5 + answer.

    Raises:
        CurriculumError(CURRICULUM_INVALID_STAGE): k out of range or unknown variant
        CurriculumError(CURRICULUM_MISSING_STEP): a reasoning step is empty
    """
    if variant not in VARIANT_STAGES:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_STAGE, f"unknown variant {variant!r}")
    last = VARIANT_STAGES[variant]
    if not 1 <= k <= last:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_STAGE, f"stage {k} outside 1..{last}")

    steps = _steps(instance)
    blocks = [step_block(name, text) for name, text in zip(STEP_NAMES, steps)]
    n_input = last - k
    input_text = "\n".join([question_block(instance)] + blocks[:n_input])
    target_blocks = blocks[n_input:]
    if variant == "equation":
        target_blocks = target_blocks + [answer_block(instance)]

    return StageSample(
        id=instance.id,
        stage=k,
        input=input_text,
        target="\n".join(target_blocks),
        images=tuple(instance.images),
    )


def sample_stage_pool(
    pool: Sequence[str],
    fraction: Union[Fraction, float, str] = DEFAULT_FRACTION,
    seed: int = 0,
    stage: int = 1,
) -> List[str]:
    """
    Seeded sample of round(fraction * |pool|) distinct ids for one stage.

    The stage index is folded into the RNG stream, so each stage draws
    independently. Halves round up.

    Raises:
        CurriculumError(CURRICULUM_EMPTY_POOL): pool is empty
        CurriculumError(CURRICULUM_INVALID_FRACTION): fraction outside (0, 1]
        CurriculumError(CURRICULUM_DUPLICATE_QUESTION_ID): pool repeats an id
    """
    fraction = as_fraction(fraction)
    if not 0 < fraction <= 1:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_FRACTION, f"fraction must lie in (0, 1], got {fraction}")
    if not pool:
        raise CurriculumError(ErrorCode.CURRICULUM_EMPTY_POOL)
    if len(set(pool)) != len(pool):
        raise CurriculumError(ErrorCode.CURRICULUM_DUPLICATE_QUESTION_ID, "pool contains repeated ids")

    size = round_half_up(fraction * len(pool))
    order = make_rng(seed, "stage", stage).permutation(len(pool))
    return [pool[int(i)] for i in order[:size]]


def _stage_list(stages: Union[int, Sequence[int]], variant: str) -> List[int]:
    if variant not in VARIANT_STAGES:
        raise CurriculumError(ErrorCode.CURRICULUM_INVALID_STAGE, f"unknown variant {variant!r}")
    wanted = list(range(1, stages + 1)) if isinstance(stages, int) else sorted(set(stages))
    for k in wanted:
        if not 1 <= k <= VARIANT_STAGES[variant]:
            raise CurriculumError(ErrorCode.CURRICULUM_INVALID_STAGE, f"stage {k} outside 1..{VARIANT_STAGES[variant]}")
    return wanted


def build_stage_files(
    instances: Sequence[Instance],
    records: Sequence[DifficultyRecord],
    out_dir: Union[str, Path],
    stages: Union[int, Sequence[int]] = N_STEPS,
    fraction: Union[Fraction, float, str] = DEFAULT_FRACTION,
    seed: int = 0,
    variant: str = "figure",
) -> List[StageFile]:
    """
    Write stage0.jsonl (Simple instances, untransformed) and stageK.jsonl.

    Stage 0 rows carry input = Q and target = the answer statement. Stage k
    rows are the stage_transform(k) of a fresh sample of the Challenging pool.
    An empty Challenging pool yields empty stage files and a warning.

    Raises:
        CurriculumError(CURRICULUM_UNCOVERED_INSTANCE): an instance has no record
    """
    wanted = _stage_list(stages, variant)
    by_id = {r.question_id: r for r in records}
    for inst in instances:
        if inst.id not in by_id:
            raise CurriculumError(ErrorCode.CURRICULUM_UNCOVERED_INSTANCE, inst.id)

    instance_by_id = {inst.id: inst for inst in instances}
    simple = [inst for inst in instances if by_id[inst.id].difficulty == Difficulty.SIMPLE]
    challenging = [inst.id for inst in instances if by_id[inst.id].difficulty == Difficulty.CHALLENGING]
    out_dir = Path(out_dir)

    stage0 = (
        StageSample(inst.id, 0, question_block(inst), answer_block(inst), tuple(inst.images)).to_dict()
        for inst in simple
    )
    files = [StageFile(0, out_dir / "stage0.jsonl", write_jsonl(out_dir / "stage0.jsonl", stage0))]

    if not challenging:
        logger.warning("No Challenging instances: stages %s will be empty", wanted)

    for k in wanted:
        picked = sample_stage_pool(challenging, fraction, seed, k) if challenging else []
        rows = (stage_transform(instance_by_id[qid], k, variant).to_dict() for qid in picked)
        path = out_dir / f"stage{k}.jsonl"
        files.append(StageFile(k, path, write_jsonl(path, rows)))
        logger.info("Stage %d: %d of %d challenging instances", k, len(picked), len(challenging))

    return files


def build_baseline_file(instances: Sequence[Instance], path: Union[str, Path]) -> int:
    """
    Plain fine-tuning rows without curriculum: input = Q, target = s1..s5 + answer.

    Returns the number of rows written.
    """
    def rows():
        for inst in instances:
            blocks = [step_block(name, text) for name, text in zip(STEP_NAMES, _steps(inst))]
            yield {
                "id": inst.id,
                "stage": "baseline",
                "input": question_block(inst),
                "target": "\n".join(blocks + [answer_block(inst)]),
                "images": list(inst.images),
            }

    return write_jsonl(path, rows())
