import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, asdict
from typing import Any, Callable, Iterable, TypeVar

import numpy as np

from tdoa_toolkit.enums import EstimatorKind
from tdoa_toolkit.exceptions import InvalidArgumentError, ConfigError

THREADS_ENV = "TDOA_TOOLKIT_THREADS"

_T = TypeVar("_T")
_R = TypeVar("_R")


@dataclass(frozen=True)
class EstimatorSpec:
    kind: EstimatorKind
    checkpoint: str | None = None

    @property
    def estimator_id(self) -> str:
        return f"{self.kind.value}:{self.checkpoint}" if self.checkpoint else self.kind.value


def parse_estimator_string(estimator_string: str) -> EstimatorSpec:
    kind, _, argument = estimator_string.partition(":")
    try:
        kind = EstimatorKind(kind.strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in EstimatorKind)
        raise InvalidArgumentError(f"unknown estimator {estimator_string!r}; valid ids: {valid}") from None

    if kind == EstimatorKind.MODEL and not argument:
        raise InvalidArgumentError("model estimator needs a checkpoint path, e.g. model:ckpt.bin")
    if kind != EstimatorKind.MODEL and argument:
        raise InvalidArgumentError(f"estimator {kind.value!r} takes no argument")
    return EstimatorSpec(kind, argument or None)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def derive_seed(master_seed: int, *path: int) -> int:
    """64-bit child seed; identical for identical (master_seed, path) regardless of call order."""
    sequence = np.random.SeedSequence(int(master_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(map(int, path)))
    return int(sequence.generate_state(1, np.uint64)[0])


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    if threads < 1:
        raise InvalidArgumentError(f"thread count must be >= 1, got {threads}")
    return threads


def parallel_map(func: Callable[[_T], _R], items: Iterable[_T], threads: int | None = 1) -> Iterable[_R]:
    """Order-preserving map; results are yielded as they become available in input order."""
    threads = worker_count(threads)
    if threads == 1:
        yield from map(func, items)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(func, items)


def strict_from_dict(cls: type[_T], data: dict[str, Any]) -> _T:
    """Build dataclass `cls` from `data`, rejecting keys it does not declare."""
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    return cls(**data)


def dataclass_to_dict(obj: Any) -> dict[str, Any]:
    return {key: list(value) if isinstance(value, tuple) else value for key, value in asdict(obj).items()}


__all__ = ("parse_estimator_string", "EstimatorSpec", "canonical_json", "content_hash", "derive_seed",
           "worker_count", "parallel_map", "strict_from_dict", "dataclass_to_dict", "THREADS_ENV")
