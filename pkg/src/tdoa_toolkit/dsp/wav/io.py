import logging
import os
from pathlib import Path

import numpy as np
import soundfile as sf

from tdoa_toolkit.audio import AudioClip
from .enums import SampleFormat
from .exceptions import MalformedWav, UnsupportedCodec

log = logging.getLogger(__name__)

_PathLike = str | os.PathLike

WAV_CONTAINERS = frozenset({"WAV", "WAVEX"})
READABLE_SUBTYPES = frozenset({"PCM_16", "PCM_24", "PCM_32", "FLOAT", "DOUBLE"})


def _info(path: Path):
    if not path.is_file():
        raise FileNotFoundError(f"no such WAV file: {path}")
    try:
        return sf.info(str(path))
    except sf.SoundFileError as e:
        raise MalformedWav(f"{path} is not a readable WAV file: {e}") from None


def read_wav(path: _PathLike) -> AudioClip:
    """Decode a PCM 16/24/32-bit or float WAV file; channels are averaged to mono."""
    path = Path(path)
    info = _info(path)
    if info.format not in WAV_CONTAINERS:
        raise UnsupportedCodec(f"{path} is a {info.format} file, not WAV")
    if info.subtype not in READABLE_SUBTYPES:
        raise UnsupportedCodec(f"{path} uses the unsupported {info.subtype} encoding")

    try:
        samples, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    except sf.SoundFileError as e:
        raise MalformedWav(f"cannot decode {path}: {e}") from None
    if info.channels > 1:
        log.debug("mixing %d channels of %s down to mono", info.channels, path)
    return AudioClip(samples.mean(axis=1), sample_rate)


def write_wav(clip: AudioClip, path: _PathLike, sample_format: SampleFormat | str = SampleFormat.PCM_16):
    sample_format = SampleFormat(sample_format)
    samples = clip.samples
    if sample_format.is_integer:
        samples = np.clip(samples, -1.0, 1.0)
    sf.write(str(path), samples, clip.sample_rate_hz, subtype=sample_format.subtype, format="WAV")
