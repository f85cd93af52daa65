import logging
from typing import Sequence

from tqdm import tqdm

from tdoa_toolkit.base import AbstractEstimator
from tdoa_toolkit.dataset.container import DatasetReader
from tdoa_toolkit.dataset.pairs import LabeledPair
from tdoa_toolkit.decorators import failures_as_outliers
from tdoa_toolkit.evaluation.metrics import EvalReport, threshold_curve, residual_histogram
from tdoa_toolkit.utils import parallel_map

log = logging.getLogger(__name__)


def estimate_pairs(estimator: AbstractEstimator, pairs: Sequence[LabeledPair],
                   threads: int | None = 1) -> list[float | None]:
    """TDOA estimates in seconds, one per pair; None where the estimator failed."""

    @failures_as_outliers
    def run(pair: LabeledPair) -> float:
        return estimator.estimate_labeled(pair).tdoa_s

    estimates = list(parallel_map(run, pairs, threads))
    failures = sum(e is None for e in estimates)
    if failures:
        log.warning("%s failed on %d of %d pairs; counted as outliers", estimator.estimator_id, failures, len(pairs))
    return estimates


def evaluate_dataset(estimator: AbstractEstimator, reader: DatasetReader, threads: int | None = 1,
                     indices: list[int] | None = None,
                     progress: bool = True) -> tuple[EvalReport, list[tuple[float, int]]]:
    """Threshold curve and residual histogram over every labelled pair of the dataset, in range or not."""
    estimates, truths, speeds = [], [], set()
    indices = reader.indices if indices is None else indices
    for index in tqdm(indices, desc=estimator.estimator_id, unit="room", disable=not progress):
        pairs = reader.read_pairs(index)
        estimates += estimate_pairs(estimator, pairs, threads)
        truths += [p.tdoa_s for p in pairs]
        speeds.update(p.speed_of_sound for p in pairs)
    speed = speeds.pop() if len(speeds) == 1 else reader.config.speed_of_sound
    report = threshold_curve(estimates, truths, estimator.estimator_id, reader.manifest_hash, speed=speed)
    log.info("%s: inlier@0.1m %.4f over %d pairs", estimator.estimator_id, report.ratio_at(0.1), len(truths))
    return report, residual_histogram(estimates, truths, speed)
