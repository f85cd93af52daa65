from tdoa_toolkit.dsp.filters import convolve, fractional_delay_kernel, resample
from tdoa_toolkit.dsp.noise import add_noise_at_snr
from tdoa_toolkit.dsp.spectral import Spectrum, rfft, irfft
from tdoa_toolkit.dsp.wav import read_wav, write_wav, SampleFormat

__all__ = [
    'Spectrum',
    'rfft',
    'irfft',
    'convolve',
    'fractional_delay_kernel',
    'resample',
    'add_noise_at_snr',
    'read_wav',
    'write_wav',
    'SampleFormat',
]
