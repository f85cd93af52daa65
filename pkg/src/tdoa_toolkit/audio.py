from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tdoa_toolkit.exceptions import InvalidArgumentError

_SamplesLike = np.ndarray | Sequence[float]


@dataclass(eq=False)
class AudioClip:
    """Mono signal sampled at `sample_rate_hz`. Samples are stored as float64."""
    samples: _SamplesLike
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise InvalidArgumentError(f"sample rate must be a positive integer, got {self.sample_rate_hz}")
        self.sample_rate_hz = int(self.sample_rate_hz)
        if not np.all(np.isfinite(self.samples)):
            raise InvalidArgumentError("audio clip contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    @property
    def power(self) -> float:
        if not len(self):
            return 0.0
        return float(np.mean(self.samples ** 2))

    def crop(self, start: int, length: int) -> "AudioClip":
        if start < 0 or start + length > len(self):
            raise InvalidArgumentError(f"crop [{start}, {start + length}) outside clip of length {len(self)}")
        return AudioClip(self.samples[start:start + length], self.sample_rate_hz)

    def require_non_empty(self) -> "AudioClip":
        if not len(self):
            raise InvalidArgumentError("audio clip is empty")
        return self

    @classmethod
    def silence(cls, length: int, sample_rate_hz: int) -> "AudioClip":
        return cls(np.zeros(length), sample_rate_hz)


def check_same_shape(x_i: AudioClip, x_j: AudioClip):
    if len(x_i) != len(x_j):
        raise InvalidArgumentError(f"clip lengths differ: {len(x_i)} != {len(x_j)}")
    if x_i.sample_rate_hz != x_j.sample_rate_hz:
        raise InvalidArgumentError(f"sample rates differ: {x_i.sample_rate_hz} != {x_j.sample_rate_hz}")
    x_i.require_non_empty()
