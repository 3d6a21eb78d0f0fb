"""
Configuration loading and validation for reasonforge.

The pipeline config is a single versioned JSON document. DEFAULT_CONFIG is
deep-merged underneath whatever the user supplies, so every field has a
default and `reasonforge generate --count 50 --seed 1` works with no file
at all. Validation errors name the offending field.
"""

import copy
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError, ErrorCode

EXPECTED_CONFIG_VERSION = 1

CATEGORIES = ("spatial", "sequential", "analytical")

# Category mix from the full-scale benchmark statistics.
DEFAULT_MIX = {"spatial": 0.42, "sequential": 0.245, "analytical": 0.335}

DEFAULT_CONFIG: Dict[str, Any] = {
    "version": EXPECTED_CONFIG_VERSION,
    "dataset_id": "rf",
    "seed": 0,
    "count": 100,
    "output_dir": "data/dataset",
    "workers": 4,
    "mix": dict(DEFAULT_MIX),
    # Uniform over 4..8 images, mean 6
    "images_per_instance": {"4": 1, "5": 1, "6": 1, "7": 1, "8": 1},
    "render": {
        "width": 512,
        "height": 512,
        "format": "png",
        "margin": 0.05,
    },
    "scene": {
        "count_min": 2,
        "count_max": 5,
        "shape_weights": {"cube": 1.0, "cylinder": 1.0, "cone": 1.0},
        "min_separation": 0.5,
        "bounds": [[0.0, 0.0, 0.0], [10.0, 10.0, 10.0]],
        "max_attempts": 10000,
        "edge_range": [0.8, 2.0],
        "radius_range": [0.4, 1.0],
        "height_range": [0.8, 2.4],
    },
    "sequence": {
        "motion": ["linear", "piecewise"],
        "speed_min": 1,
        "speed_max": 4,
        "arena": 40,
        "landmarks": 2,
    },
    "scale_chain": {
        "length_min": 2,
        "length_max": 4,
        "ratio_min": 1.0,
        "ratio_max": 12.0,
        "max_denominator": 8,
    },
    "curriculum": {
        "threshold": 0.7,
        "fraction": 0.4,
        "stages": 5,
        "variant": "figure",
        "trials": 10,
    },
    "templates": None,
    "matcher": {
        "enabled": False,
        "timeout_seconds": 30,
        "max_in_flight": 4,
    },
}


def find_config_file(config_path: Optional[str] = None) -> Optional[str]:
    """
    Locate a config file.

    An explicit path must exist. Without one, the default locations are
    searched and None means "use defaults only".
    """
    if config_path:
        if os.path.exists(config_path):
            return config_path
        raise ConfigError(ErrorCode.CONFIG_FILE_NOT_FOUND, f"Config file not found: {config_path}")

    search_paths = [
        "./reasonforge-config.json",
        "./config/reasonforge-config.json",
        os.path.expanduser("~/.config/reasonforge/config.json"),
    ]
    for path in search_paths:
        if os.path.exists(path):
            return path
    return None


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load, merge and validate a pipeline config.

    Args:
        config_path: Path to a JSON config; None loads defaults only.

    Returns:
        Validated configuration dictionary with defaults merged.

    Raises:
        ConfigError: If the file is missing, unparsable or fails validation.
    """
    raw_config: Dict[str, Any] = {"version": EXPECTED_CONFIG_VERSION}
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                raw_config = json.load(f)
        except FileNotFoundError:
            raise ConfigError(ErrorCode.CONFIG_FILE_NOT_FOUND, f"Config file not found: {config_path}")
        except json.JSONDecodeError:
            raise ConfigError(ErrorCode.CONFIG_INVALID_JSON)

        if not isinstance(raw_config, dict):
            raise ConfigError(ErrorCode.CONFIG_INVALID_JSON, "Config must be a JSON object")

        version = raw_config.get("version", EXPECTED_CONFIG_VERSION)
        if version != EXPECTED_CONFIG_VERSION:
            raise ConfigError(
                ErrorCode.CONFIG_VERSION_MISMATCH,
                f"Expected version {EXPECTED_CONFIG_VERSION}, got {version}",
            )

    config = _deep_merge(DEFAULT_CONFIG, raw_config)
    validate_config(config)
    return config


def apply_overrides(config: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Apply CLI flag overrides and revalidate.

    Keys are dotted paths ("render.width"); None values mean "flag not given".
    """
    result = copy.deepcopy(config)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = result
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    validate_config(result)
    return result


def _invalid(field: str, why: str) -> ConfigError:
    return ConfigError(ErrorCode.CONFIG_INVALID_VALUE, f"{field}: {why}")


def validate_config(config: Dict[str, Any]) -> None:
    """Validate field values; raises ConfigError naming the first bad field."""
    if not isinstance(config.get("seed"), int):
        raise _invalid("seed", "must be an integer")

    count = config.get("count")
    if not isinstance(count, int) or count < 1:
        raise _invalid("count", "must be an integer >= 1")

    if not isinstance(config.get("workers"), int) or config["workers"] < 1:
        raise _invalid("workers", "must be an integer >= 1")

    mix = config.get("mix", {})
    if set(mix) != set(CATEGORIES):
        raise _invalid("mix", f"must name exactly {', '.join(CATEGORIES)}")
    if any((not isinstance(v, (int, float))) or v < 0 for v in mix.values()):
        raise _invalid("mix", "proportions must be non-negative numbers")
    if abs(sum(mix.values()) - 1.0) > 1e-9:
        raise _invalid("mix", "proportions must sum to 1")

    images = config.get("images_per_instance", {})
    if not images:
        raise _invalid("images_per_instance", "must not be empty")
    for key, weight in images.items():
        try:
            k = int(key)
        except (TypeError, ValueError):
            raise _invalid("images_per_instance", f"key {key!r} is not an integer")
        if k < 2:
            raise _invalid("images_per_instance", "every instance needs at least 2 images")
        if weight <= 0:
            raise _invalid("images_per_instance", "weights must be positive")

    render = config["render"]
    if render["width"] <= 0 or render["height"] <= 0:
        raise _invalid("render.width/height", "must be positive")
    if str(render["format"]).lower() not in ("png", "ppm"):
        raise _invalid("render.format", "must be png or ppm")
    if not 0 <= render["margin"] < 1:
        raise _invalid("render.margin", "must lie in [0, 1)")

    scene = config["scene"]
    if scene["count_min"] < 2 or scene["count_max"] < scene["count_min"]:
        raise _invalid("scene.count_min/count_max", "range must satisfy 2 <= min <= max")
    if scene["min_separation"] < 0:
        raise _invalid("scene.min_separation", "must be >= 0")
    if scene["max_attempts"] < 1:
        raise _invalid("scene.max_attempts", "must be >= 1")
    lo, hi = scene["bounds"]
    if len(lo) != 3 or len(hi) != 3 or any(a >= b for a, b in zip(lo, hi)):
        raise _invalid("scene.bounds", "must be [[x0,y0,z0],[x1,y1,z1]] with min < max")
    if not any(w > 0 for w in scene["shape_weights"].values()):
        raise _invalid("scene.shape_weights", "at least one weight must be positive")
    for name in ("edge_range", "radius_range", "height_range"):
        a, b = scene[name]
        if a <= 0 or b < a:
            raise _invalid(f"scene.{name}", "must satisfy 0 < min <= max")

    sequence = config["sequence"]
    if not sequence["motion"] or any(m not in ("linear", "piecewise") for m in sequence["motion"]):
        raise _invalid("sequence.motion", "must list linear and/or piecewise")
    if sequence["speed_min"] < 1 or sequence["speed_max"] < sequence["speed_min"]:
        raise _invalid("sequence.speed_min/speed_max", "range must satisfy 1 <= min <= max")

    chain = config["scale_chain"]
    if chain["length_min"] < 2 or chain["length_max"] < chain["length_min"]:
        raise _invalid("scale_chain.length_min/length_max", "range must satisfy 2 <= min <= max")
    if chain["ratio_min"] < 1 or chain["ratio_max"] < chain["ratio_min"]:
        raise _invalid("scale_chain.ratio_min/ratio_max", "range must satisfy 1 <= min <= max")
    if not 1 <= chain["max_denominator"] <= 8:
        raise _invalid("scale_chain.max_denominator", "must lie in 1..8")

    curriculum = config["curriculum"]
    if not 0 < curriculum["threshold"] <= 1:
        raise _invalid("curriculum.threshold", "must lie in (0, 1]")
    if not 0 < curriculum["fraction"] <= 1:
        raise _invalid("curriculum.fraction", "must lie in (0, 1]")
    if curriculum["variant"] not in ("figure", "equation"):
        raise _invalid("curriculum.variant", "must be figure or equation")

    matcher = config["matcher"]
    if matcher["max_in_flight"] < 1:
        raise _invalid("matcher.max_in_flight", "must be >= 1")


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge two dictionaries; `update` wins on leaves."""
    result = copy.deepcopy(base)
    for key, value in update.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


@dataclass(frozen=True)
class PipelineConfig:
    """Typed view over the validated config dictionary."""

    master_seed: int
    dataset_id: str
    count: int
    mix: Dict[str, float]
    images_per_instance: Dict[int, float]
    output_dir: str
    raster_size: Tuple[int, int]
    image_format: str
    margin: float
    threshold: float
    stage_fraction: float
    template_catalog: Optional[str]
    workers: int
    raw: Dict[str, Any]

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "PipelineConfig":
        return cls(
            master_seed=config["seed"],
            dataset_id=str(config["dataset_id"]),
            count=config["count"],
            mix=dict(config["mix"]),
            images_per_instance={int(k): float(v) for k, v in config["images_per_instance"].items()},
            output_dir=config["output_dir"],
            raster_size=(config["render"]["width"], config["render"]["height"]),
            image_format=str(config["render"]["format"]).lower(),
            margin=config["render"]["margin"],
            threshold=config["curriculum"]["threshold"],
            stage_fraction=config["curriculum"]["fraction"],
            template_catalog=config.get("templates"),
            workers=config["workers"],
            raw=config,
        )

    def snapshot(self) -> Dict[str, Any]:
        """Config fields that determine dataset content (no output paths, no logging)."""
        skip = {"output_dir", "logging", "workers", "matcher"}
        return {k: copy.deepcopy(v) for k, v in self.raw.items() if k not in skip}

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)
