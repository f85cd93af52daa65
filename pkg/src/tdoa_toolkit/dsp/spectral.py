from dataclasses import dataclass

import numpy as np

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.exceptions import InvalidArgumentError


@dataclass(eq=False)
class Spectrum:
    bins: np.ndarray
    bin_spacing_hz: float
    transform_length: int

    @property
    def sample_rate_hz(self) -> float:
        return self.bin_spacing_hz * self.transform_length

    @property
    def frequencies_hz(self) -> np.ndarray:
        return np.arange(self.bins.shape[-1]) * self.bin_spacing_hz

    def below(self, f_max_hz: float) -> np.ndarray:
        """Bins whose centre frequency is strictly below f_max_hz."""
        return self.bins[..., :bins_below(f_max_hz, self.transform_length, self.sample_rate_hz)]


def bins_below(f_max_hz: float, transform_length: int, sample_rate_hz: float) -> int:
    count = int(np.ceil(f_max_hz * transform_length / sample_rate_hz))
    return min(max(count, 0), transform_length // 2 + 1)


def rfft(clip: AudioClip) -> Spectrum:
    clip.require_non_empty()
    n = len(clip)
    return Spectrum(np.fft.rfft(clip.samples), clip.sample_rate_hz / n, n)


def irfft(spectrum: Spectrum) -> AudioClip:
    if spectrum.bins.shape[-1] != spectrum.transform_length // 2 + 1:
        raise InvalidArgumentError(
            f"spectrum has {spectrum.bins.shape[-1]} bins, expected {spectrum.transform_length // 2 + 1}")
    samples = np.fft.irfft(spectrum.bins, n=spectrum.transform_length)
    return AudioClip(samples, int(round(spectrum.sample_rate_hz)))
