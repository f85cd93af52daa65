import logging
import math
from dataclasses import dataclass

import numpy as np

from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import BaseEstimator, TdoaEstimate
from tdoa_toolkit.decorators import requires_clip_pair
from tdoa_toolkit.enums import Weighting
from tdoa_toolkit.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

PHAT_GUARD = 1e-12
GEOMETRY_LAG_MARGIN = 2


@dataclass(eq=False)
class CorrelationCurve:
    """Correlation values at signed lags `lags[0] = -(N // 2)` ... `lags[-1]`."""
    values: np.ndarray
    lags: np.ndarray
    sample_rate_hz: int

    def window(self, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
        keep = np.abs(self.lags) <= max_lag
        return self.lags[keep], self.values[keep]

    def at(self, lag: int) -> float:
        return float(self.values[lag - self.lags[0]])


@requires_clip_pair
def gcc_curve(x_i: AudioClip, x_j: AudioClip, weighting: Weighting | str = Weighting.PHAT) -> CorrelationCurve:
    weighting = Weighting(weighting)
    n = len(x_i)
    cross = np.fft.rfft(x_i.samples) * np.conj(np.fft.rfft(x_j.samples))
    if weighting == Weighting.PHAT:
        magnitude = np.abs(cross)
        cross = cross / np.maximum(magnitude, PHAT_GUARD * max(float(magnitude.max()), np.finfo(float).tiny))
    values = np.roll(np.fft.irfft(cross, n=n), n // 2)
    return CorrelationCurve(values, np.arange(n) - n // 2, x_i.sample_rate_hz)


def peak_of(curve: CorrelationCurve, max_lag: int) -> TdoaEstimate:
    """Largest value with |lag| <= max_lag; ties go to the smaller |lag|, then to the negative lag."""
    lags, values = curve.window(max_lag)
    candidates = lags[values == values.max()]
    lag = int(min(candidates, key=lambda l: (abs(l), l)))
    peak = curve.at(lag)
    total = float(np.sum(np.abs(values)))
    return TdoaEstimate.from_lag(lag, curve.sample_rate_hz, peak, peak / total if total > 0 else 0.0)


def default_max_lag(transform_length: int, mic_distance_m: float | None = None, sample_rate_hz: int | None = None,
                    speed_of_sound: float = SPEED_OF_SOUND) -> int:
    """ceil(d * fs / c) + 2 when the pair geometry is known, N // 4 otherwise; always below N / 2."""
    upper = (transform_length - 1) // 2
    if upper < 1:
        raise InvalidArgumentError(f"clips of {transform_length} samples are too short to search any lag")
    if mic_distance_m is None:
        lag = transform_length // 4
    else:
        lag = math.ceil(mic_distance_m * sample_rate_hz / speed_of_sound) + GEOMETRY_LAG_MARGIN
    return min(max(lag, 1), upper)


def gcc_phat_estimate(x_i: AudioClip, x_j: AudioClip, max_lag: int | None = None,
                      weighting: Weighting | str = Weighting.PHAT) -> TdoaEstimate:
    """
    Integer-lag TDOA estimate from the generalized cross-correlation.

    A positive lag means x_i hears the source later than x_j.
    """
    curve = gcc_curve(x_i, x_j, weighting)
    n = len(x_i)
    if max_lag is None:
        max_lag = default_max_lag(n)
    if not 0 < max_lag < n / 2:
        raise InvalidArgumentError(f"max_lag must lie in (0, {n / 2}), got {max_lag}")
    return peak_of(curve, max_lag)


class GccPhatEstimator(BaseEstimator):

    def __init__(self, weighting: Weighting | str = Weighting.PHAT, max_lag: int | None = None):
        self.weighting = Weighting(weighting)
        self.max_lag = max_lag
        self.estimator_id = "gccphat" if self.weighting == Weighting.PHAT else "gccplain"

    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
        return gcc_phat_estimate(x_i, x_j, self.max_lag, self.weighting)

    def estimate_labeled(self, pair) -> TdoaEstimate:
        max_lag = self.max_lag
        if max_lag is None:
            max_lag = default_max_lag(len(pair.clip_i), pair.mic_distance_m, pair.sample_rate_hz,
                                      pair.speed_of_sound)
        return gcc_phat_estimate(pair.clip_i, pair.clip_j, max_lag, self.weighting)
