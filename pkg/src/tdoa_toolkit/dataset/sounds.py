import logging
import os
from abc import ABC, abstractmethod
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dsp.filters import resample
from tdoa_toolkit.dsp.wav import read_wav
from tdoa_toolkit.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

SYNTHETIC_KINDS = ("noise_bursts", "chirp", "tone_complex")
PEAK_LEVEL = 0.5


class SoundPool(ABC):
    """Source of dry signals that scenarios play back."""

    name: str

    @abstractmethod
    def draw(self, rng: np.random.Generator, length: int, sample_rate_hz: int) -> tuple[AudioClip, str]:
        """Return a clip of at least `length` samples and a label describing where it came from."""


class SyntheticPool(SoundPool):
    name = "synthetic"

    def draw(self, rng: np.random.Generator, length: int, sample_rate_hz: int) -> tuple[AudioClip, str]:
        kind = SYNTHETIC_KINDS[int(rng.integers(len(SYNTHETIC_KINDS)))]
        t = np.arange(length) / sample_rate_hz
        nyquist = sample_rate_hz / 2

        if kind == "noise_bursts":
            samples = rng.standard_normal(length) * _burst_envelope(rng, length, sample_rate_hz)
        elif kind == "chirp":
            f0, f1 = rng.uniform(100.0, 0.25 * nyquist), rng.uniform(0.1 * nyquist, 0.9 * nyquist)
            samples = signal.chirp(t, f0=f0, t1=t[-1], f1=f1, method="linear", phi=rng.uniform(0, 360))
        else:
            count = int(rng.integers(3, 9))
            frequencies = rng.uniform(100.0, 0.5 * nyquist, count)
            phases = rng.uniform(0, 2 * np.pi, count)
            amplitudes = rng.uniform(0.2, 1.0, count)
            samples = np.sum(amplitudes[:, None] * np.sin(2 * np.pi * frequencies[:, None] * t + phases[:, None]),
                             axis=0)

        samples *= PEAK_LEVEL / max(np.max(np.abs(samples)), 1e-12)
        return AudioClip(samples, sample_rate_hz), f"synthetic:{kind}"


def _burst_envelope(rng: np.random.Generator, length: int, sample_rate_hz: int) -> np.ndarray:
    """On/off gate; bursts of 0.1-0.5 s separated by gaps of at most 50 ms."""
    envelope = np.zeros(length)
    position = 0
    while position < length:
        burst = int(rng.uniform(0.1, 0.5) * sample_rate_hz)
        envelope[position:position + burst] = 1.0
        position += burst + int(rng.uniform(0.0, 0.05) * sample_rate_hz)
    return envelope


@lru_cache(maxsize=64)
def _load(path: str, sample_rate_hz: int) -> AudioClip:
    clip = read_wav(path)
    if clip.sample_rate_hz < sample_rate_hz:
        raise InvalidArgumentError(f"{path} is sampled at {clip.sample_rate_hz} Hz, below {sample_rate_hz} Hz")
    if clip.sample_rate_hz != sample_rate_hz:
        log.info("resampling %s from %d Hz to %d Hz", path, clip.sample_rate_hz, sample_rate_hz)
        clip = resample(clip, sample_rate_hz)
    return clip


class WavDirectoryPool(SoundPool):
    name = "wav"

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.files = sorted(str(p) for p in self.directory.rglob("*.wav"))
        if not self.files:
            raise InvalidArgumentError(f"no .wav files found under {self.directory}")

    def draw(self, rng: np.random.Generator, length: int, sample_rate_hz: int) -> tuple[AudioClip, str]:
        order = rng.permutation(len(self.files))
        for index in order:
            clip = _load(self.files[index], sample_rate_hz)
            if len(clip) >= length and clip.power > 0:
                return clip, os.path.relpath(self.files[index], self.directory)
        raise InvalidArgumentError(f"no file under {self.directory} has {length} samples at {sample_rate_hz} Hz")
