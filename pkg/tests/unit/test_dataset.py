"""Tests for dataset generation, loading and manifest checks."""

import json
from collections import Counter

import pytest

from reasonforge.config import DEFAULT_CONFIG, DEFAULT_MIX, PipelineConfig, apply_overrides
from reasonforge.dataset import (
    INSTANCES_FILE,
    MANIFEST_FILE,
    category_counts,
    category_plan,
    compute_stats,
    generate_dataset,
    instance_id,
    load_instances,
    render_preview,
)
from reasonforge.errors import DatasetError, ErrorCode
from reasonforge.qa import validate_instance
from reasonforge.render import load_image
from reasonforge.utils import read_json, read_jsonl


@pytest.fixture
def generated(small_config):
    manifest = generate_dataset(small_config)
    return small_config.output_path, manifest


def test_instance_id():
    assert instance_id("rf", 7) == "rf-000007"


@pytest.mark.parametrize(
    "count,expected",
    [
        (100, {"spatial": 42, "sequential": 24, "analytical": 34}),
        (1000, {"spatial": 420, "sequential": 245, "analytical": 335}),
        (1, {"spatial": 1, "sequential": 0, "analytical": 0}),
    ],
)
def test_category_counts(count, expected):
    assert category_counts(count, DEFAULT_MIX) == expected


def test_category_plan_is_seeded(small_config):
    plan = category_plan(small_config)
    assert len(plan) == 12
    assert plan == category_plan(small_config)
    assert sorted(set(plan)) == ["analytical", "sequential", "spatial"]


def test_generate_writes_layout(generated, small_config):
    out, manifest = generated
    assert (out / INSTANCES_FILE).is_file()
    assert (out / MANIFEST_FILE).is_file()
    assert manifest.count == 12
    assert sum(manifest.counts.values()) == 12

    instances = load_instances(out)
    assert [i.id for i in instances] == [instance_id("rf", n) for n in range(12)]
    for inst in instances:
        validate_instance(inst)
        for rel in inst.images:
            img = load_image(out / rel)
            assert (img.width, img.height) == (32, 32)
    assert manifest.total_images == sum(len(i.images) for i in instances)
    assert read_json(out / MANIFEST_FILE)["config"] == small_config.snapshot()


@pytest.mark.slow
def test_generation_is_deterministic(tmp_path, small_config):
    first = generate_dataset(small_config, tmp_path / "one")
    single_worker = PipelineConfig.from_dict(apply_overrides(small_config.raw, {"workers": 1}))
    second = generate_dataset(single_worker, tmp_path / "two")
    assert first.instances_sha256 == second.instances_sha256
    assert (tmp_path / "one" / INSTANCES_FILE).read_bytes() == (tmp_path / "two" / INSTANCES_FILE).read_bytes()


@pytest.mark.slow
def test_seed_changes_content(tmp_path, small_config):
    other = PipelineConfig.from_dict(apply_overrides(small_config.raw, {"seed": 4}))
    assert generate_dataset(small_config, tmp_path / "a").instances_sha256 != generate_dataset(
        other, tmp_path / "b"
    ).instances_sha256


@pytest.mark.slow
def test_default_mix_and_image_average(tmp_path):
    """A thousand instances land on the default mix within one each and average about six images."""
    raw = apply_overrides(
        DEFAULT_CONFIG,
        {"count": 1000, "workers": 4, "output_dir": str(tmp_path / "ds"), "render.width": 32, "render.height": 32},
    )
    generate_dataset(PipelineConfig.from_dict(raw))
    rows = read_jsonl(tmp_path / "ds" / INSTANCES_FILE)

    counts = Counter(r["category"] for r in rows)
    for category, share in DEFAULT_MIX.items():
        assert abs(counts[category] - share * len(rows)) <= 1, category
    mean_images = sum(len(r["images"]) for r in rows) / len(rows)
    assert 5.5 <= mean_images <= 6.5


class TestComputeStats:

    def test_stats_match_manifest(self, generated):
        out, manifest = generated
        stats = compute_stats(out)
        assert stats.counts == manifest.counts
        assert stats.total_images == manifest.total_images
        assert stats.mean_annotation_chars > 0
        assert abs(sum(stats.mix.values()) - 1.0) < 1e-9
        assert "images:" in stats.format_table()

    def test_missing_manifest(self, generated):
        out, _ = generated
        (out / MANIFEST_FILE).unlink()
        with pytest.raises(DatasetError) as exc:
            compute_stats(out)
        assert exc.value.code == ErrorCode.DATASET_MANIFEST_MISMATCH
        assert "missing manifest" in str(exc.value)

    def test_deleted_image(self, generated):
        out, _ = generated
        first_image = sorted((out / "images").iterdir())[0]
        first_image.unlink()
        with pytest.raises(DatasetError) as exc:
            compute_stats(out)
        assert "total images" in str(exc.value)

    def test_edited_instances(self, generated):
        out, _ = generated
        path = out / INSTANCES_FILE
        path.write_text(path.read_text() + "\n")
        with pytest.raises(DatasetError) as exc:
            compute_stats(out)
        assert "instances hash" in str(exc.value)

    def test_tampered_counts(self, generated):
        out, _ = generated
        data = read_json(out / MANIFEST_FILE)
        data["counts"]["spatial"] += 1
        (out / MANIFEST_FILE).write_text(json.dumps(data))
        with pytest.raises(DatasetError) as exc:
            compute_stats(out)
        assert "counts" in str(exc.value)


def test_load_instances_rejects_bad_record(tmp_path):
    path = tmp_path / INSTANCES_FILE
    path.write_text(json.dumps({"id": "x"}) + "\n")
    with pytest.raises(DatasetError) as exc:
        load_instances(path)
    assert exc.value.code == ErrorCode.DATASET_INVALID_RECORD
    assert "line 1" in str(exc.value)


def test_render_preview(tmp_path, small_config):
    paths = render_preview(small_config, seed=2, out_dir=tmp_path / "preview")
    assert [p.name for p in paths] == ["preview_front.png", "preview_side.png", "preview_top.png"]
    assert all(p.is_file() for p in paths)
    assert (tmp_path / "preview" / "preview_scene.json").is_file()
