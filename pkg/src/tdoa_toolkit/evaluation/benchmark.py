import logging
import time
from dataclasses import dataclass

import numpy as np

from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import AbstractEstimator
from tdoa_toolkit.dataset.pairs import LabeledPair, tdoa_to_class
from tdoa_toolkit.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

BENCHMARK_BATCH = 100
MAX_SHIFT = 400


@dataclass(frozen=True)
class BenchmarkRow:
    estimator_id: str
    n_pairs: int
    ms_per_pair: float


def shifted_noise_pairs(n_pairs: int, length: int, sample_rate_hz: int, seed: int) -> list[LabeledPair]:
    """White noise against a circularly shifted copy of itself, shifts uniform in [-400, 400]."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n_pairs):
        x = rng.standard_normal(length)
        shift = int(rng.integers(-MAX_SHIFT, MAX_SHIFT + 1))
        tdoa = shift / sample_rate_hz
        pairs.append(LabeledPair(mic_i=0, mic_j=1, clip_i=AudioClip(np.roll(x, shift), sample_rate_hz),
                                 clip_j=AudioClip(x, sample_rate_hz), tdoa_s=tdoa,
                                 class_id=tdoa_to_class(tdoa, sample_rate_hz),
                                 mic_distance_m=(MAX_SHIFT + 1) * SPEED_OF_SOUND / sample_rate_hz,
                                 speed_of_sound=SPEED_OF_SOUND))
    return pairs


def benchmark(estimators: list[AbstractEstimator], pairs: list[LabeledPair],
              batch: int = BENCHMARK_BATCH) -> list[BenchmarkRow]:
    """Wall-clock milliseconds per pair, timed in batches of `batch` pairs. Informational only."""
    if not pairs or batch < 1:
        raise InvalidArgumentError("benchmark needs at least one pair and a positive batch size")
    rows = []
    for estimator in estimators:
        elapsed = 0.0
        for start in range(0, len(pairs), batch):
            chunk = pairs[start:start + batch]
            began = time.perf_counter()
            for pair in chunk:
                estimator.estimate_labeled(pair)
            elapsed += time.perf_counter() - began
        row = BenchmarkRow(estimator.estimator_id, len(pairs), 1000.0 * elapsed / len(pairs))
        log.info("%s: %.3f ms per pair over %d pairs", row.estimator_id, row.ms_per_pair, row.n_pairs)
        rows.append(row)
    return rows
