import logging
from math import gcd

import numpy as np
from scipy import signal

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.enums import ConvolveMode
from tdoa_toolkit.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

FRACTIONAL_DELAY_TAPS = 81
MIN_FRACTIONAL_DELAY_TAPS = 11

# Fraction of the lower Nyquist frequency kept by the anti-alias filter.
RESAMPLE_CUTOFF = 0.9
RESAMPLE_HALF_LENGTH_PER_RATE = 20
RESAMPLE_KAISER_BETA = 8.0


def convolve(a: np.ndarray, b: np.ndarray, mode: ConvolveMode | str = ConvolveMode.FULL) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise InvalidArgumentError("cannot convolve empty signals")
    mode = ConvolveMode(mode)

    full = signal.convolve(a, b, mode="full", method="auto")
    if mode == ConvolveMode.SAME_AS_FIRST:
        return full[:a.size]
    return full


def fractional_delay_kernel(delay_samples: float, taps: int = FRACTIONAL_DELAY_TAPS) -> np.ndarray:
    """
    Hann-windowed sinc interpolator centred on tap (taps - 1) // 2.

    Convolving with the kernel delays a band-limited signal by
    (taps - 1) // 2 + delay_samples; the integer centre offset is the caller's
    to remove. The kernel is scaled to unit DC gain.
    """
    if taps % 2 == 0 or taps < MIN_FRACTIONAL_DELAY_TAPS:
        raise InvalidArgumentError(f"taps must be odd and >= {MIN_FRACTIONAL_DELAY_TAPS}, got {taps}")
    if not abs(delay_samples) < 1:
        raise InvalidArgumentError(f"fractional delay must satisfy |delay| < 1, got {delay_samples}")
    return fractional_delay_kernels(np.array([delay_samples], dtype=np.float64), taps)[0]


def fractional_delay_kernels(fractions: np.ndarray, taps: int) -> np.ndarray:
    """One kernel row per fractional delay."""
    centre = (taps - 1) // 2
    t = np.arange(taps, dtype=np.float64)[None, :] - centre - fractions[:, None]
    window = 0.5 * (1.0 + np.cos(2.0 * np.pi * t / (taps + 1)))
    window[np.abs(t) > (taps + 1) / 2] = 0.0
    kernels = np.sinc(t) * window
    return kernels / kernels.sum(axis=1, keepdims=True)


def resample(clip: AudioClip, target_rate_hz: int) -> AudioClip:
    if target_rate_hz <= 0 or int(target_rate_hz) != target_rate_hz:
        raise InvalidArgumentError(f"target rate must be a positive integer, got {target_rate_hz}")
    target_rate_hz = int(target_rate_hz)
    clip.require_non_empty()
    if target_rate_hz == clip.sample_rate_hz:
        return AudioClip(clip.samples.copy(), target_rate_hz)

    divisor = gcd(clip.sample_rate_hz, target_rate_hz)
    up, down = target_rate_hz // divisor, clip.sample_rate_hz // divisor
    max_rate = max(up, down)
    taps = signal.firwin(2 * RESAMPLE_HALF_LENGTH_PER_RATE * max_rate + 1, RESAMPLE_CUTOFF / max_rate,
                         window=("kaiser", RESAMPLE_KAISER_BETA))
    log.debug("resampling %d Hz -> %d Hz (up=%d, down=%d, %d taps)",
              clip.sample_rate_hz, target_rate_hz, up, down, taps.size)
    samples = signal.resample_poly(clip.samples, up, down, window=taps, padtype="line")
    return AudioClip(samples, target_rate_hz)
