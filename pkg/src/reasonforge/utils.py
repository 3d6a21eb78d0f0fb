"""
Utility functions shared across reasonforge modules.

Seed derivation, exact rational helpers, rounding rules, JSON/JSONL I/O and
content hashing. Everything here is deterministic: the same inputs always
give the same bytes.
"""

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Sequence, Union

import numpy as np

from .errors import DatasetError, ErrorCode, StorageError

PathLike = Union[str, Path]

_SALTS = {
    "scene": 1,
    "task": 2,
    "mcq": 3,
    "plan": 4,
    "stage": 5,
    "images": 6,
}


def derive_seed(master: int, *keys: Union[int, str]) -> int:
    """
    Derive an independent 64-bit seed from a master seed and a key path.

    String keys are mapped through a fixed salt table (unknown strings are
    hashed), so derive_seed(7, 3, "mcq") is stable across runs and Python
    versions.
    """
    entropy: List[int] = [int(master) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            salt = _SALTS.get(key)
            if salt is None:
                salt = int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:4], "big")
            entropy.append(salt)
        else:
            entropy.append(int(key))
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 32) | int(state[1])


def make_rng(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """numpy Generator for (seed, keys...)."""
    if keys:
        seed = derive_seed(seed, *keys)
    return np.random.default_rng(seed)


def as_fraction(value: Union[int, float, str, Fraction]) -> Fraction:
    """Exact rational for a config value; floats go through their repr so 0.7 is 7/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def round_half_up(value: Fraction) -> int:
    """Round a non-negative rational to the nearest integer, halves up."""
    return math.floor(value + Fraction(1, 2))


def largest_remainder(total: int, weights: Mapping[str, Union[float, Fraction]]) -> Dict[str, int]:
    """
    Apportion `total` items across keys by the largest-remainder method.

    Ties on the remainder go to the larger quota, then to key order.
    """
    fractions = {k: as_fraction(v) for k, v in weights.items()}
    weight_sum = sum(fractions.values())
    quotas = {k: total * f / weight_sum for k, f in fractions.items()}
    counts = {k: math.floor(q) for k, q in quotas.items()}
    leftover = total - sum(counts.values())
    order = list(weights.keys())
    ranked = sorted(
        order,
        key=lambda k: (-(quotas[k] - counts[k]), -quotas[k], order.index(k)),
    )
    for key in ranked[:leftover]:
        counts[key] += 1
    return counts


def format_ratio(value: Fraction) -> str:
    """
    Human-readable rational: "18", "1.5", "0.375" or "2/3".

    Decimal form is used only when it terminates within three places.
    """
    if value.denominator == 1:
        return str(value.numerator)
    scaled = value * 1000
    if scaled.denominator == 1:
        text = f"{value.numerator / value.denominator:.3f}".rstrip("0").rstrip(".")
        return text
    return f"{value.numerator}/{value.denominator}"


def stable_json(data: Any) -> str:
    """Compact JSON with sorted keys, used wherever bytes must be reproducible."""
    return json.dumps(data, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def sha256_file(path: PathLike, chunk_size: int = 1024 * 1024) -> str:
    """Streaming SHA-256 of a file."""
    hasher = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(chunk_size), b""):
                hasher.update(chunk)
    except OSError as e:
        raise StorageError(ErrorCode.IO_READ_FAILED, f"{path}: {e}")
    return hasher.hexdigest()


def write_json(path: PathLike, data: Any) -> None:
    """Write pretty JSON with stable key order."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageError(ErrorCode.IO_WRITE_FAILED, f"{path}: {e}")


def read_json(path: PathLike) -> Any:
    """
    Read a JSON document.

    Raises:
        StorageError(IO_READ_FAILED): file unreadable
        DatasetError(DATASET_INVALID_RECORD): not UTF-8 JSON
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise StorageError(ErrorCode.IO_READ_FAILED, f"{path}: {e}")
    except json.JSONDecodeError as e:
        raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path}:{e.lineno}: not valid JSON ({e.msg})")
    except UnicodeDecodeError:
        raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path}: not UTF-8 text")


def write_jsonl(path: PathLike, rows: Iterable[Dict[str, Any]]) -> int:
    """Write one stable-JSON object per line; returns the row count."""
    path = Path(path)
    count = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for row in rows:
                f.write(stable_json(row))
                f.write("\n")
                count += 1
    except OSError as e:
        raise StorageError(ErrorCode.IO_WRITE_FAILED, f"{path}: {e}")
    return count


def iter_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    """
    Yield objects from a JSONL file, skipping blank lines.

    Raises:
        StorageError(IO_READ_FAILED): file unreadable
        DatasetError(DATASET_INVALID_RECORD): a line is not a JSON object
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path}:{line_no}: not valid JSON ({e.msg})")
                if not isinstance(row, dict):
                    raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path}:{line_no}: expected a JSON object")
                yield row
    except OSError as e:
        raise StorageError(ErrorCode.IO_READ_FAILED, f"{path}: {e}")
    except UnicodeDecodeError:
        raise DatasetError(ErrorCode.DATASET_INVALID_RECORD, f"{path}: not UTF-8 text")


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    return list(iter_jsonl(path))


def weighted_choice(rng: np.random.Generator, options: Sequence[Any], weights: Sequence[float]) -> Any:
    """Pick one option with probability proportional to its weight."""
    probs = np.asarray(weights, dtype=float)
    probs = probs / probs.sum()
    return options[int(rng.choice(len(options), p=probs))]
