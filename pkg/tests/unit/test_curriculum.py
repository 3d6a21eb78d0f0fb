"""Tests for the difficulty filter and curriculum staging."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reasonforge.curriculum import (
    Difficulty,
    DifficultyRecord,
    TrialLog,
    aggregate_trial_logs,
    answer_block,
    build_baseline_file,
    build_stage_files,
    classify_difficulty,
    question_block,
    sample_stage_pool,
    split_blocks,
    stage_transform,
)
from reasonforge.config import DEFAULT_CONFIG, PipelineConfig, apply_overrides
from reasonforge.dataset import build_facts, category_plan, instance_id
from reasonforge.errors import CurriculumError, ErrorCode
from reasonforge.models import STEP_NAMES
from reasonforge.qa import make_instance
from reasonforge.utils import derive_seed, read_jsonl


@pytest.fixture(scope="module")
def generated_instances():
    """1,000 instances from the default config, built without rendering images."""
    config = PipelineConfig.from_dict(apply_overrides(DEFAULT_CONFIG, {"count": 1000, "seed": 21}))
    instances = []
    for index, category in enumerate(category_plan(config)):
        facts, _ = build_facts(config, category, index)
        mcq_seed = derive_seed(config.master_seed, index, "mcq")
        instances.append(make_instance(facts, instance_id(config.dataset_id, index), mcq_seed))
    return instances


def _trials(qid, results, model="m"):
    return [
        {"question_id": qid, "model_id": model, "trial_index": i, "predicted": "A", "correct": ok}
        for i, ok in enumerate(results)
    ]


def _records(instances, simple_ids):
    return [
        DifficultyRecord(
            inst.id, 10, 10, Fraction(1),
            Difficulty.SIMPLE if inst.id in simple_ids else Difficulty.CHALLENGING,
        )
        for inst in instances
    ]


# --- classification ---------------------------------------------------------


@pytest.mark.parametrize("c", range(11))
def test_classification_is_exact_at_threshold(c):
    """c/10 against 0.7: seven correct is Simple, six is not."""
    [record] = classify_difficulty([TrialLog("q", n=10, c=c)], threshold=0.7)
    expected = Difficulty.SIMPLE if c >= 7 else Difficulty.CHALLENGING
    assert record.difficulty == expected
    assert record.p == Fraction(c, 10)


def test_classification_accepts_fraction_threshold():
    [record] = classify_difficulty([TrialLog("q", n=3, c=2)], threshold=Fraction(2, 3))
    assert record.difficulty == Difficulty.SIMPLE


def test_classification_errors():
    with pytest.raises(CurriculumError) as exc:
        classify_difficulty([])
    assert exc.value.code == ErrorCode.CURRICULUM_INVALID_LOG

    with pytest.raises(CurriculumError) as exc:
        classify_difficulty([TrialLog("q", 10, 3), TrialLog("q", 10, 4)])
    assert exc.value.code == ErrorCode.CURRICULUM_DUPLICATE_QUESTION_ID

    with pytest.raises(CurriculumError) as exc:
        classify_difficulty([TrialLog("q", 10, 3)], threshold=0)
    assert exc.value.code == ErrorCode.CURRICULUM_INVALID_FRACTION


@pytest.mark.parametrize("n,c", [(0, 0), (10, 11), (10, -1)])
def test_trial_log_bounds(n, c):
    with pytest.raises(CurriculumError) as exc:
        TrialLog("q", n=n, c=c)
    assert exc.value.code == ErrorCode.CURRICULUM_INVALID_LOG


def test_record_dict_round_trip():
    record = DifficultyRecord("q", 7, 10, Fraction(7, 10), Difficulty.SIMPLE)
    data = record.to_dict()
    assert data == {"question_id": "q", "c": 7, "n": 10, "p": "7/10", "class": "Simple"}
    assert DifficultyRecord.from_dict(data) == record


def test_malformed_record():
    with pytest.raises(CurriculumError) as exc:
        DifficultyRecord.from_dict({"question_id": "q", "c": 1, "n": 2, "p": "1/2", "class": "Medium"})
    assert exc.value.code == ErrorCode.CURRICULUM_INVALID_LOG
    with pytest.raises(CurriculumError):
        DifficultyRecord.from_dict(["q", 1, 2])


class TestAggregateTrialLogs:

    def test_tallies_per_question(self):
        rows = _trials("q1", [True] * 7 + [False] * 3) + _trials("q2", [False] * 10)
        logs = aggregate_trial_logs(rows)
        assert logs == [TrialLog("q1", 10, 7), TrialLog("q2", 10, 0)]

    def test_model_filter(self):
        rows = _trials("q1", [True, True], model="a") + _trials("q1", [False], model="b")
        assert aggregate_trial_logs(rows, model_id="b") == [TrialLog("q1", 1, 0)]

    def test_duplicate_trial_rejected(self):
        rows = _trials("q1", [True]) * 2
        with pytest.raises(CurriculumError) as exc:
            aggregate_trial_logs(rows)
        assert exc.value.code == ErrorCode.CURRICULUM_INVALID_LOG
        assert "duplicate" in str(exc.value)

    def test_non_bool_correct_rejected(self):
        rows = _trials("q1", [True])
        rows[0]["correct"] = 1
        with pytest.raises(CurriculumError):
            aggregate_trial_logs(rows)

    def test_missing_field(self):
        with pytest.raises(CurriculumError):
            aggregate_trial_logs([{"question_id": "q1", "correct": True}])

    def test_row_must_be_object(self):
        with pytest.raises(CurriculumError) as exc:
            aggregate_trial_logs([["q1", "m", 0, "A", True]])
        assert "expected an object" in str(exc.value)


# --- stage transform --------------------------------------------------------


def _block_names(text):
    return [name for name, _ in split_blocks(text)[1]]


class TestStageTransform:

    def test_stage_one_moves_conclusion(self, toy_instance):
        sample = stage_transform(toy_instance, 1)
        assert _block_names(sample.input) == list(STEP_NAMES[:4])
        assert _block_names(sample.target) == ["conclusion"]
        assert sample.input.startswith(question_block(toy_instance))
        assert sample.images == tuple(toy_instance.images)

    def test_stage_three(self, toy_instance):
        sample = stage_transform(toy_instance, 3)
        assert _block_names(sample.input) == ["summary", "caption"]
        assert _block_names(sample.target) == ["text2region", "region2region", "conclusion"]

    def test_stage_five_is_question_only(self, toy_instance):
        sample = stage_transform(toy_instance, 5)
        lead, blocks = split_blocks(sample.input)
        assert blocks == []
        assert lead == question_block(toy_instance)
        assert _block_names(sample.target) == list(STEP_NAMES)

    @pytest.mark.parametrize("k", range(1, 6))
    def test_steps_partition(self, toy_instance, k):
        """Input and target together carry every step exactly once, in order."""
        sample = stage_transform(toy_instance, k)
        _, input_blocks = split_blocks(sample.input)
        _, target_blocks = split_blocks(sample.target)
        combined = input_blocks + target_blocks
        assert [name for name, _ in combined] == list(STEP_NAMES)
        assert [body for _, body in combined] == toy_instance.reasoning.as_list()
        assert len(target_blocks) == k

    @pytest.mark.slow
    def test_generated_instances_partition(self, generated_instances):
        for inst in generated_instances:
            steps = inst.reasoning.as_list()
            for k in range(1, 6):
                sample = stage_transform(inst, k)
                _, input_blocks = split_blocks(sample.input)
                _, target_blocks = split_blocks(sample.target)
                assert (len(input_blocks), len(target_blocks)) == (5 - k, k)
                assert [body for _, body in input_blocks + target_blocks] == steps, inst.id
            question_only = stage_transform(inst, 5).input
            assert not any(step in question_only for step in steps)

    def test_equation_variant(self, toy_instance):
        first = stage_transform(toy_instance, 1, variant="equation")
        assert _block_names(first.input) == list(STEP_NAMES)
        assert _block_names(first.target) == ["answer"]
        assert first.target == answer_block(toy_instance)

        last = stage_transform(toy_instance, 6, variant="equation")
        assert _block_names(last.input) == []
        assert _block_names(last.target) == list(STEP_NAMES) + ["answer"]

    @pytest.mark.parametrize("k,variant", [(0, "figure"), (6, "figure"), (7, "equation"), (1, "sideways")])
    def test_invalid_stage(self, toy_instance, k, variant):
        with pytest.raises(CurriculumError) as exc:
            stage_transform(toy_instance, k, variant)
        assert exc.value.code == ErrorCode.CURRICULUM_INVALID_STAGE

    def test_missing_step(self, toy_instance):
        from dataclasses import replace

        broken = replace(toy_instance, reasoning=replace(toy_instance.reasoning, caption="  "))
        with pytest.raises(CurriculumError) as exc:
            stage_transform(broken, 2)
        assert exc.value.code == ErrorCode.CURRICULUM_MISSING_STEP
        assert "caption" in str(exc.value)


# --- sampling ---------------------------------------------------------------


class TestSampleStagePool:

    def test_default_fraction_of_hundred(self):
        pool = [f"q{i}" for i in range(100)]
        picked = sample_stage_pool(pool, seed=1)
        assert len(picked) == 40
        assert len(set(picked)) == 40
        assert set(picked) <= set(pool)

    def test_full_fraction_is_a_permutation(self):
        pool = [f"q{i}" for i in range(17)]
        assert sorted(sample_stage_pool(pool, fraction=1)) == sorted(pool)

    def test_deterministic_per_seed_and_stage(self):
        pool = [f"q{i}" for i in range(50)]
        assert sample_stage_pool(pool, seed=4, stage=2) == sample_stage_pool(pool, seed=4, stage=2)
        assert sample_stage_pool(pool, seed=4, stage=2) != sample_stage_pool(pool, seed=4, stage=3)

    def test_half_rounds_up(self):
        # 0.4 * 5 = 2, 0.5 * 5 = 2.5 -> 3
        pool = ["a", "b", "c", "d", "e"]
        assert len(sample_stage_pool(pool)) == 2
        assert len(sample_stage_pool(pool, fraction=Fraction(1, 2))) == 3

    def test_empty_pool(self):
        with pytest.raises(CurriculumError) as exc:
            sample_stage_pool([])
        assert exc.value.code == ErrorCode.CURRICULUM_EMPTY_POOL

    @pytest.mark.parametrize("fraction", [0, -0.1, 1.5])
    def test_fraction_range(self, fraction):
        with pytest.raises(CurriculumError) as exc:
            sample_stage_pool(["a"], fraction=fraction)
        assert exc.value.code == ErrorCode.CURRICULUM_INVALID_FRACTION

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=1000), st.integers(min_value=0, max_value=2**32))
    def test_sample_size_for_any_pool(self, size, seed):
        pool = [f"q{i}" for i in range(size)]
        picked = sample_stage_pool(pool, seed=seed)
        expected = (2 * size + 2) // 5  # round_half_up(0.4 * size)
        assert len(picked) == expected
        assert len(set(picked)) == expected


# --- stage files ------------------------------------------------------------


class TestBuildStageFiles:

    def test_sixty_simple_forty_challenging(self, tmp_path, instance_factory):
        instances = [instance_factory(f"rf-{i:06d}") for i in range(100)]
        simple_ids = {inst.id for inst in instances[:60]}
        files = build_stage_files(instances, _records(instances, simple_ids), tmp_path, seed=9)

        assert [f.stage for f in files] == [0, 1, 2, 3, 4, 5]
        assert files[0].rows == 60
        assert all(f.rows == 16 for f in files[1:])

        stage0 = read_jsonl(tmp_path / "stage0.jsonl")
        assert {row["id"] for row in stage0} == simple_ids
        assert stage0[0]["target"].startswith("[ANSWER]\n")

        stage2 = read_jsonl(tmp_path / "stage2.jsonl")
        assert {row["id"] for row in stage2}.isdisjoint(simple_ids)
        assert all(row["stage"] == 2 for row in stage2)
        assert _block_names(stage2[0]["target"]) == ["region2region", "conclusion"]

    def test_all_simple_leaves_stages_empty(self, tmp_path, caplog, instance_factory):
        instances = [instance_factory(f"rf-{i:06d}") for i in range(5)]
        simple_ids = {inst.id for inst in instances}
        with caplog.at_level("WARNING", logger="reasonforge"):
            files = build_stage_files(instances, _records(instances, simple_ids), tmp_path)
        assert files[0].rows == 5
        assert all(f.rows == 0 for f in files[1:])
        assert (tmp_path / "stage5.jsonl").read_text() == ""
        assert "No Challenging instances" in caplog.text

    def test_uncovered_instance(self, tmp_path, instance_factory):
        instances = [instance_factory("rf-000001"), instance_factory("rf-000002")]
        with pytest.raises(CurriculumError) as exc:
            build_stage_files(instances, _records(instances[:1], set()), tmp_path)
        assert exc.value.code == ErrorCode.CURRICULUM_UNCOVERED_INSTANCE
        assert "rf-000002" in str(exc.value)

    def test_selected_stages_only(self, tmp_path, toy_instances):
        files = build_stage_files(toy_instances, _records(toy_instances, set()), tmp_path, stages=[2, 4])
        assert [f.stage for f in files] == [0, 2, 4]
        assert not (tmp_path / "stage1.jsonl").exists()

    def test_baseline_file(self, tmp_path, toy_instances):
        path = tmp_path / "baseline.jsonl"
        assert build_baseline_file(toy_instances, path) == 10
        row = read_jsonl(path)[0]
        assert row["stage"] == "baseline"
        assert _block_names(row["target"]) == list(STEP_NAMES) + ["answer"]
