from dataclasses import dataclass

from tdoa_toolkit.audio import AudioClip, check_same_shape
from tdoa_toolkit.base import AbstractEstimator, TdoaEstimate
from tdoa_toolkit.exceptions import InvalidArgumentError

SOURCE_WINDOW_OVERLAP = 5 / 6


@dataclass(frozen=True)
class WindowEstimate:
    start: int
    t_start_s: float
    t_center_s: float
    estimate: TdoaEstimate


def window_hop(window: int, overlap: float) -> int:
    if window <= 0:
        raise InvalidArgumentError(f"window must be positive, got {window}")
    if not 0.0 <= overlap < 1.0:
        raise InvalidArgumentError(f"overlap must lie in [0, 1), got {overlap}")
    hop = int(round(window * (1.0 - overlap)))
    if hop < 1:
        raise InvalidArgumentError(f"overlap {overlap} leaves no hop for a window of {window} samples")
    return hop


def window_starts(length: int, window: int, overlap: float) -> range:
    """Offsets 0, hop, 2 hop, ... of every window lying fully inside `length` samples."""
    hop = window_hop(window, overlap)
    if length < window:
        raise InvalidArgumentError(f"clip of {length} samples is shorter than the {window}-sample window")
    return range(0, length - window + 1, hop)


def sliding_window_infer(estimator: AbstractEstimator, clip_i: AudioClip, clip_j: AudioClip, window: int,
                         overlap: float = SOURCE_WINDOW_OVERLAP) -> list[WindowEstimate]:
    check_same_shape(clip_i, clip_j)
    fs = clip_i.sample_rate_hz
    results = []
    for start in window_starts(len(clip_i), window, overlap):
        estimate = estimator.estimate(clip_i.crop(start, window), clip_j.crop(start, window))
        results.append(WindowEstimate(start, start / fs, (start + window / 2) / fs, estimate))
    return results
