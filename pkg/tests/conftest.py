"""Shared fixtures: hand-built instances, a small pipeline config and JSON fixture files."""

import json
import logging
from pathlib import Path

import pytest

from reasonforge.config import DEFAULT_CONFIG, PipelineConfig, apply_overrides
from reasonforge.models import MCQ, Instance, ReasoningSteps, Segment

FIXTURES_DIR = Path(__file__).parent / "fixtures"


def build_instance(qid: str = "rf-000001", category: str = "spatial", answer: str = "B", n_images: int = 2) -> Instance:
    """A hand-written instance with distinct, recognisable step texts."""
    segments = [Segment("text", text="Look at the scenes.")]
    for i in range(1, n_images + 1):
        segments.append(Segment("image", image=f"images/{qid}_img{i}.png", index=i))
    segments.append(Segment("text", text="Which statement is true?"))
    return Instance(
        id=qid,
        category=category,
        task="toy",
        segments=tuple(segments),
        mcq=MCQ(
            question="Which statement is true?",
            options={"A": "red left of blue", "B": "red right of blue", "C": "red above blue", "D": "red below blue"},
            answer=answer,
        ),
        reasoning=ReasoningSteps(
            summary="S1 summary text.",
            caption="S2 caption text.",
            text2region="S3 grounding text.",
            region2region="S4 relating text.",
            conclusion=f"S5 conclusion. The answer is {answer}.",
        ),
        provenance={"seed": 0},
    )


@pytest.fixture(autouse=True)
def _propagate_logs():
    """setup_logging() detaches the package logger from root; reattach so caplog sees records."""
    logging.getLogger("reasonforge").propagate = True
    yield


@pytest.fixture
def twelve_items():
    """Raw model outputs for twelve questions with hand-computed matches and scores."""
    return json.loads((FIXTURES_DIR / "evaluation" / "twelve_items.json").read_text(encoding="utf-8"))


@pytest.fixture
def instance_factory():
    return build_instance


@pytest.fixture
def toy_instance():
    return build_instance()


@pytest.fixture
def toy_instances():
    """Ten toy instances rf-000000 .. rf-000009, one per category round-robin."""
    categories = ["spatial", "sequential", "analytical"]
    return [build_instance(f"rf-{i:06d}", categories[i % 3], "ABCD"[i % 4]) for i in range(10)]


@pytest.fixture
def small_config(tmp_path):
    """Twelve instances on a 32x32 raster, written under tmp_path."""
    raw = apply_overrides(
        DEFAULT_CONFIG,
        {
            "count": 12,
            "seed": 3,
            "workers": 2,
            "output_dir": str(tmp_path / "dataset"),
            "render.width": 32,
            "render.height": 32,
        },
    )
    return PipelineConfig.from_dict(raw)
