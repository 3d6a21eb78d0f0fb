"""
Dataset generation, persistence and integrity checks.

Directory layout (all paths inside are relative, so the directory can move):
    <output_dir>/
        instances.jsonl      one instance per line, index order
        images/              <instance_id>_img<k>.<ext>
        manifest.json        config snapshot, counts, image stats, content hash

Generation fans out over a thread pool. Every instance derives its RNG
streams from (master seed, instance index), renders and writes only its own
image files, and hands its record back; instances.jsonl and manifest.json
are written by the calling thread, so output bytes do not depend on the
worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .config import CATEGORIES, PipelineConfig
from .errors import DatasetError, ErrorCode, QAError, ReasonForgeError, SceneError, TaskError
from .geometry import View
from .logging import get_logger, log_duration
from .models import STEP_NAMES, Instance
from .qa import load_catalog, make_instance, validate_instance
from .render import emit_image, rasterize, scene_window, project
from .scene import SceneSpec, generate_scene
from .taskgen import (
    ScaleChainSpec,
    SequenceSpec,
    SpatialSpec,
    TaskFacts,
    gen_scale_chain,
    gen_sequence,
    gen_spatial,
)
from .utils import (
    derive_seed,
    iter_jsonl,
    largest_remainder,
    make_rng,
    read_json,
    sha256_file,
    weighted_choice,
    write_json,
    write_jsonl,
)

INSTANCES_FILE = "instances.jsonl"
MANIFEST_FILE = "manifest.json"
IMAGES_DIR = "images"

# Fresh task seeds tried when a scene has no usable relation or cannot be packed
MAX_TASK_ATTEMPTS = 10

logger = get_logger("dataset")


@dataclass(frozen=True)
class Manifest:
    dataset_id: str
    config: Dict[str, Any]
    counts: Dict[str, int]
    total_images: int
    mean_images: float
    instances_sha256: str

    @property
    def count(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset_id": self.dataset_id,
            "config": self.config,
            "counts": dict(self.counts),
            "count": self.count,
            "total_images": self.total_images,
            "mean_images": self.mean_images,
            "instances_sha256": self.instances_sha256,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Manifest":
        try:
            return cls(
                dataset_id=str(data["dataset_id"]),
                config=dict(data.get("config") or {}),
                counts={str(k): int(v) for k, v in data["counts"].items()},
                total_images=int(data["total_images"]),
                mean_images=float(data["mean_images"]),
                instances_sha256=str(data["instances_sha256"]),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise DatasetError(ErrorCode.DATASET_MANIFEST_MISMATCH, f"manifest fields: {e}")


@dataclass(frozen=True)
class DatasetStats:
    counts: Dict[str, int]
    total_images: int
    mean_images: float
    mean_annotation_chars: float
    annotation_chars_by_category: Dict[str, float] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return sum(self.counts.values())

    @property
    def mix(self) -> Dict[str, float]:
        return {c: (n / self.count if self.count else 0.0) for c, n in self.counts.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "counts": dict(self.counts),
            "mix": self.mix,
            "total_images": self.total_images,
            "mean_images": self.mean_images,
            "mean_annotation_chars": self.mean_annotation_chars,
            "annotation_chars_by_category": dict(self.annotation_chars_by_category),
        }

    def format_table(self) -> str:
        lines = [f"{'category':<12}  {'count':>6}  {'share':>6}  {'chars':>8}"]
        for c, n in self.counts.items():
            chars = self.annotation_chars_by_category.get(c, 0.0)
            lines.append(f"{c:<12}  {n:>6}  {self.mix[c]:>6.3f}  {chars:>8.1f}")
        lines.append(f"{'total':<12}  {self.count:>6}  {1.0 if self.count else 0.0:>6.3f}  {self.mean_annotation_chars:>8.1f}")
        lines.append(f"images: {self.total_images} (mean {self.mean_images:.2f} per instance)")
        return "\n".join(lines)


def instance_id(dataset_id: str, index: int) -> str:
    return f"{dataset_id}-{index:06d}"


def category_counts(count: int, mix: Dict[str, float]) -> Dict[str, int]:
    """Largest-remainder apportionment of `count` over the category mix."""
    return largest_remainder(count, {c: mix[c] for c in CATEGORIES})


def category_plan(config: PipelineConfig) -> List[str]:
    """Category for every instance index: exact counts, seeded order."""
    counts = category_counts(config.count, config.mix)
    plan = [c for c in CATEGORIES for _ in range(counts[c])]
    order = make_rng(config.master_seed, "plan").permutation(len(plan))
    return [plan[int(i)] for i in order]


def _image_budget(config: PipelineConfig, index: int) -> int:
    sizes = sorted(config.images_per_instance)
    rng = make_rng(config.master_seed, index, "images")
    return int(weighted_choice(rng, sizes, [config.images_per_instance[s] for s in sizes]))


def build_facts(config: PipelineConfig, category: str, index: int) -> Tuple[TaskFacts, Dict[str, Any]]:
    """
    Task facts for one instance plus the provenance needed to rebuild them.

    Raises:
        TaskError / SceneError: no usable facts after MAX_TASK_ATTEMPTS seeds
    """
    raw = config.raw
    n_images = _image_budget(config, index)
    choice_rng = make_rng(config.master_seed, index, "task")

    if category == "spatial":
        spec: Any = SpatialSpec(
            scene=SceneSpec.from_config(raw["scene"]),
            total_images=n_images,
            margin=config.margin,
        )
        generator, name = gen_spatial, "gen_spatial"
    elif category == "sequential":
        seq = raw["sequence"]
        motions = list(seq["motion"])
        spec = SequenceSpec(
            T=max(3, n_images),
            motion=motions[int(choice_rng.integers(len(motions)))],
            speed_min=seq["speed_min"],
            speed_max=seq["speed_max"],
            arena=seq["arena"],
            landmarks=seq["landmarks"],
        )
        generator, name = gen_sequence, "gen_sequence"
    else:
        chain = raw["scale_chain"]
        longest = max(chain["length_min"], min(chain["length_max"], n_images))
        length = int(choice_rng.integers(chain["length_min"], longest + 1))
        spec = ScaleChainSpec(
            L=length,
            ratio_min=chain["ratio_min"],
            ratio_max=chain["ratio_max"],
            max_denominator=chain["max_denominator"],
            total_images=max(n_images, length),
        )
        generator, name = gen_scale_chain, "gen_scale_chain"

    last_error: Optional[ReasonForgeError] = None
    for attempt in range(MAX_TASK_ATTEMPTS):
        seed = derive_seed(config.master_seed, index, "scene", attempt)
        try:
            facts = generator(spec, seed)
        except (TaskError, SceneError) as e:
            if e.code not in (ErrorCode.TASK_NO_RELATION_AVAILABLE, ErrorCode.SCENE_PLACEMENT_EXHAUSTED):
                raise
            logger.debug("Instance %d attempt %d: %s", index, attempt, e)
            last_error = e
            continue
        provenance = {"generator": name, "spec": spec.to_dict(), "seed": seed, "index": index}
        return facts, provenance
    raise last_error


def render_images(facts: TaskFacts, instance: Instance, out_dir: Path, size: Tuple[int, int], image_format: str) -> None:
    width, height = size
    for plan, rel_path in zip(facts.images, instance.images):
        emit_image(rasterize(plan.projection, width, height, plan.window), image_format, out_dir / rel_path)


def generate_instance(config: PipelineConfig, category: str, index: int, out_dir: Path) -> Dict[str, Any]:
    """Build, validate and render one instance; returns its JSONL record."""
    facts, provenance = build_facts(config, category, index)
    mcq_seed = derive_seed(config.master_seed, index, "mcq")
    provenance["mcq_seed"] = mcq_seed
    instance = make_instance(
        facts,
        instance_id(config.dataset_id, index),
        mcq_seed,
        image_format=config.image_format,
        catalog=load_catalog(config.template_catalog),
        provenance=provenance,
    )
    render_images(facts, instance, out_dir, config.raster_size, config.image_format)
    return instance.to_dict()


def generate_dataset(config: PipelineConfig, out_dir: Optional[Union[str, Path]] = None) -> Manifest:
    """
    Generate `config.count` validated instances with their images and manifest.

    Raises:
        ReasonForgeError: generation, validation or I/O failure
    """
    out = Path(out_dir) if out_dir is not None else config.output_path
    (out / IMAGES_DIR).mkdir(parents=True, exist_ok=True)
    plan = category_plan(config)
    logger.info("Generating %d instances into %s with %d workers", len(plan), out, config.workers)

    with log_duration(logger, "generate"):
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(
                pool.map(lambda job: generate_instance(config, job[1], job[0], out), enumerate(plan))
            )

    instances_path = out / INSTANCES_FILE
    write_jsonl(instances_path, records)

    total_images = sum(len(r["images"]) for r in records)
    counts = {c: sum(1 for r in records if r["category"] == c) for c in CATEGORIES}
    manifest = Manifest(
        dataset_id=config.dataset_id,
        config=config.snapshot(),
        counts=counts,
        total_images=total_images,
        mean_images=round(total_images / len(records), 6),
        instances_sha256=sha256_file(instances_path),
    )
    write_json(out / MANIFEST_FILE, manifest.to_dict())
    logger.info("Wrote %d instances, %d images", len(records), total_images)
    return manifest


def load_instances(path: Union[str, Path]) -> List[Instance]:
    """
    Read and re-validate instances from a dataset dir or instances.jsonl.

    Raises:
        DatasetError(DATASET_INVALID_RECORD): a line fails to parse or validate
    """
    path = Path(path)
    if path.is_dir():
        path = path / INSTANCES_FILE
    instances = []
    for line_no, row in enumerate(iter_jsonl(path), start=1):
        try:
            instance = Instance.from_dict(row)
            validate_instance(instance)
        except QAError as e:
            raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path.name} line {line_no}: {e.message}")
        instances.append(instance)
    return instances


def _mismatch(what: str) -> DatasetError:
    return DatasetError(ErrorCode.DATASET_MANIFEST_MISMATCH, what)


def compute_stats(dataset_dir: Union[str, Path]) -> DatasetStats:
    """
    Recompute dataset statistics and cross-check them against the manifest.

    Raises:
        DatasetError(DATASET_MANIFEST_MISMATCH): message names the field that
            disagrees ("missing manifest", "instances hash", "counts",
            "total images", "mean images")
    """
    root = Path(dataset_dir)
    manifest_path = root / MANIFEST_FILE
    if not manifest_path.exists():
        raise _mismatch("missing manifest")
    manifest = Manifest.from_dict(read_json(manifest_path))

    instances_path = root / INSTANCES_FILE
    if not instances_path.exists():
        raise _mismatch("missing instances")
    if sha256_file(instances_path) != manifest.instances_sha256:
        raise _mismatch("instances hash")

    instances = load_instances(instances_path)
    counts = {c: sum(1 for i in instances if i.category == c) for c in CATEGORIES}
    if counts != {c: manifest.counts.get(c, 0) for c in CATEGORIES}:
        raise _mismatch("counts")

    total_images = sum(1 for i in instances for rel in i.images if (root / rel).is_file())
    if total_images != manifest.total_images:
        raise _mismatch("total images")
    mean_images = round(total_images / len(instances), 6) if instances else 0.0
    if abs(mean_images - manifest.mean_images) > 1e-6:
        raise _mismatch("mean images")

    chars = {c: [] for c in CATEGORIES}
    for inst in instances:
        chars[inst.category].append(sum(len(getattr(inst.reasoning, n)) for n in STEP_NAMES))
    all_chars = [n for values in chars.values() for n in values]
    return DatasetStats(
        counts=counts,
        total_images=total_images,
        mean_images=mean_images,
        mean_annotation_chars=sum(all_chars) / len(all_chars) if all_chars else 0.0,
        annotation_chars_by_category={c: (sum(v) / len(v) if v else 0.0) for c, v in chars.items()},
    )


def render_preview(config: PipelineConfig, seed: int, out_dir: Union[str, Path]) -> List[Path]:
    """Write one generated scene's front, side and top views for inspection."""
    scene = generate_scene(SceneSpec.from_config(config.raw["scene"]), seed)
    width, height = config.raster_size
    out = Path(out_dir)
    paths = []
    for view in View:
        img = rasterize(project(scene, view), width, height, scene_window(scene, view, config.margin))
        paths.append(emit_image(img, config.image_format, out / f"preview_{view.value}.{config.image_format}"))
    write_json(out / "preview_scene.json", scene.to_dict())
    return paths
