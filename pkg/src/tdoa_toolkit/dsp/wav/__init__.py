from .enums import SampleFormat
from .io import read_wav, write_wav

__all__ = [
    'SampleFormat',
    'read_wav',
    'write_wav',
]
