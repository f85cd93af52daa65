import numpy as np

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.decorators import requires_clip_pair
from tdoa_toolkit.dsp.spectral import rfft
from tdoa_toolkit.enums import FrontendNorm
from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.neural.tensor import Tensor

NORM_GUARD = 1e-12


def clip_spectrum(clip: AudioClip, f_max_hz: float, norm: FrontendNorm | str = FrontendNorm.NONE) -> np.ndarray:
    """[Re X, Im X] of the bins strictly below f_max_hz, shape (2, bins)."""
    nyquist = clip.sample_rate_hz / 2
    if not 0 < f_max_hz < nyquist:
        raise InvalidArgumentError(f"f_max must lie in (0, {nyquist}) Hz, got {f_max_hz}")
    bins = rfft(clip).below(f_max_hz)
    if FrontendNorm(norm) == FrontendNorm.PHAT:
        magnitude = np.abs(bins)
        bins = bins / np.maximum(magnitude, NORM_GUARD * max(float(magnitude.max(initial=0.0)), np.finfo(float).tiny))
    return np.stack([bins.real, bins.imag])


@requires_clip_pair
def frontend(x_i: AudioClip, x_j: AudioClip, f_max_hz: float,
             norm: FrontendNorm | str = FrontendNorm.NONE) -> Tensor:
    """Channels [Re X_i, Im X_i, Re X_j, Im X_j] over the bins below f_max_hz."""
    return Tensor(np.concatenate([clip_spectrum(x_i, f_max_hz, norm), clip_spectrum(x_j, f_max_hz, norm)]))


def pair_features(spectrum_i: np.ndarray, spectrum_j: np.ndarray) -> np.ndarray:
    """Stack precomputed (..., 2, bins) clip spectra into (..., 4, bins) features."""
    return np.concatenate([spectrum_i, spectrum_j], axis=-2)
