import logging
import os
from typing import Sequence

import numpy as np

from tdoa_toolkit.audio import AudioClip, check_same_shape
from tdoa_toolkit.base import BaseEstimator, TdoaEstimate
from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.neural.checkpoint import Checkpoint, load_checkpoint
from tdoa_toolkit.neural.frontend import clip_spectrum, pair_features
from tdoa_toolkit.neural.functional import softmax
from tdoa_toolkit.neural.model import TdoaNetwork
from tdoa_toolkit.neural.tensor import no_grad

log = logging.getLogger(__name__)


def _check_clip(network: TdoaNetwork, clip: AudioClip):
    config = network.config
    if len(clip) != config.input_len or clip.sample_rate_hz != config.sample_rate_hz:
        raise InvalidArgumentError(f"model expects {config.input_len} samples at {config.sample_rate_hz} Hz, "
                                   f"got {len(clip)} at {clip.sample_rate_hz} Hz")


def _estimates(network: TdoaNetwork, features: np.ndarray) -> list[TdoaEstimate]:
    config = network.config
    with no_grad():
        logits = network(features).data.astype(np.float64)
    probabilities = softmax(logits)
    classes = np.argmax(logits, axis=1)
    half = config.num_classes // 2
    return [TdoaEstimate.from_lag(int(c) - half, config.sample_rate_hz, float(logits[row, c]),
                                  float(probabilities[row, c]))
            for row, c in enumerate(classes)]


def predict_tdoa(checkpoint: Checkpoint | TdoaNetwork, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
    """Regression via classification: the argmax class mapped to its bin centre, softmax maximum as confidence."""
    check_same_shape(x_i, x_j)
    network = checkpoint if isinstance(checkpoint, TdoaNetwork) else checkpoint.network()
    _check_clip(network, x_i)
    config = network.config
    features = pair_features(clip_spectrum(x_i, config.f_max_hz, config.frontend_norm),
                             clip_spectrum(x_j, config.f_max_hz, config.frontend_norm))
    return _estimates(network, features[None])[0]


class NeuralEstimator(BaseEstimator):
    """Read-only wrapper around a loaded checkpoint; safe to share between threads."""

    def __init__(self, checkpoint: Checkpoint, estimator_id: str = "model", batch_size: int = 256):
        self.checkpoint = checkpoint
        self.network = checkpoint.network()
        self.estimator_id = estimator_id
        self.batch_size = batch_size

    @classmethod
    def from_file(cls, path: str | os.PathLike, estimator_id: str | None = None) -> "NeuralEstimator":
        checkpoint = load_checkpoint(path)
        log.info("loaded %s (%d parameters)", path, checkpoint.config.num_parameters)
        return cls(checkpoint, estimator_id or f"model:{path}")

    @property
    def input_len(self) -> int:
        return self.network.config.input_len

    @property
    def sample_rate_hz(self) -> int:
        return self.network.config.sample_rate_hz

    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
        return predict_tdoa(self.network, x_i, x_j)

    def estimate_batch(self, pairs: Sequence[tuple[AudioClip, AudioClip]]) -> list[TdoaEstimate]:
        config = self.network.config
        results = []
        for start in range(0, len(pairs), self.batch_size):
            chunk = pairs[start:start + self.batch_size]
            for x_i, x_j in chunk:
                _check_clip(self.network, x_i)
                _check_clip(self.network, x_j)
            features = np.stack([pair_features(clip_spectrum(x_i, config.f_max_hz, config.frontend_norm),
                                               clip_spectrum(x_j, config.f_max_hz, config.frontend_norm))
                                 for x_i, x_j in chunk])
            results.extend(_estimates(self.network, features))
        return results
