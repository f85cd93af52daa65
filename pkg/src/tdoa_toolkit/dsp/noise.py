import math

import numpy as np

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.exceptions import InvalidArgumentError


def add_noise_at_snr(clip: AudioClip, snr_db: float, rng: np.random.Generator) -> AudioClip:
    """White Gaussian noise at 10*log10(P_signal / P_noise) = snr_db; snr_db = +inf adds nothing."""
    if math.isinf(snr_db) and snr_db > 0:
        return AudioClip(clip.samples.copy(), clip.sample_rate_hz)
    if math.isnan(snr_db) or math.isinf(snr_db):
        raise InvalidArgumentError(f"snr_db must be finite or +inf, got {snr_db}")

    signal_power = clip.power
    if signal_power <= 0:
        raise InvalidArgumentError("signal has zero power, SNR is undefined")

    noise = rng.standard_normal(len(clip))
    noise_power = float(np.mean(noise ** 2))
    noise *= math.sqrt(signal_power / (noise_power * 10.0 ** (snr_db / 10.0)))
    return AudioClip(clip.samples + noise, clip.sample_rate_hz)
