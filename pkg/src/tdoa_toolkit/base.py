from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from tdoa_toolkit.audio import AudioClip

if TYPE_CHECKING:
    from tdoa_toolkit.dataset.pairs import LabeledPair


@dataclass(frozen=True)
class TdoaEstimate:
    lag_samples: int
    tdoa_s: float
    peak_value: float
    confidence: float

    @classmethod
    def from_lag(cls, lag_samples: int, sample_rate_hz: int, peak_value: float, confidence: float) -> "TdoaEstimate":
        return cls(int(lag_samples), int(lag_samples) / sample_rate_hz, float(peak_value),
                   min(max(float(confidence), 0.0), 1.0))


class AbstractEstimator(ABC):
    """Anything that turns two equally long clips into a TdoaEstimate."""

    estimator_id: str

    @abstractmethod
    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate: ...

    @abstractmethod
    def estimate_labeled(self, pair: "LabeledPair") -> TdoaEstimate: ...


class BaseEstimator(AbstractEstimator, ABC):
    estimator_id = "estimator"

    def estimate_labeled(self, pair: "LabeledPair") -> TdoaEstimate:
        return self.estimate(pair.clip_i, pair.clip_j)

    def estimate_batch(self, pairs: Sequence[tuple[AudioClip, AudioClip]]) -> list[TdoaEstimate]:
        return [self.estimate(x_i, x_j) for x_i, x_j in pairs]

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.estimator_id}>"
