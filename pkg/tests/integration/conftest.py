"""Shared fixtures for integration tests."""

from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest

from reasonforge.config import DEFAULT_CONFIG, PipelineConfig, apply_overrides
from reasonforge.dataset import generate_dataset
from reasonforge.models import OPTION_KEYS
from reasonforge.utils import read_jsonl


@pytest.fixture(scope="module")
def pipeline_dataset(tmp_path_factory) -> Path:
    """A 30-instance dataset on a 48x48 raster, generated once per module."""
    out = tmp_path_factory.mktemp("pipeline") / "dataset"
    raw = apply_overrides(
        DEFAULT_CONFIG,
        {"count": 30, "seed": 11, "output_dir": str(out), "render.width": 48, "render.height": 48},
    )
    generate_dataset(PipelineConfig.from_dict(raw))
    return out


def simulated_trials(rows: List[Dict], skill: float, seed: int, trials: int = 10) -> List[Dict]:
    """Trial logs from a model that answers correctly with probability `skill`."""
    rng = np.random.default_rng(seed)
    logs = []
    for row in rows:
        for t in range(trials):
            correct = bool(rng.random() < skill)
            wrong = [k for k in OPTION_KEYS if k != row["answer"]]
            predicted = row["answer"] if correct else wrong[t % 3]
            logs.append(
                {"question_id": row["id"], "model_id": "sim", "trial_index": t, "predicted": predicted, "correct": correct}
            )
    return logs


def instance_rows(dataset: Path) -> List[Dict]:
    return read_jsonl(dataset / "instances.jsonl")
