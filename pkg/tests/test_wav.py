import numpy as np
import pytest
import soundfile as sf

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dsp.wav import read_wav, write_wav, SampleFormat
from tdoa_toolkit.dsp.wav.exceptions import MalformedWav, UnsupportedCodec
from tdoa_toolkit.exceptions import FormatError

FS = 16000


def test_pcm16_round_trip(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(AudioClip([0.0, 0.5, -0.5], FS), path)
    clip = read_wav(path)
    assert clip.sample_rate_hz == FS
    np.testing.assert_allclose(clip.samples, [0.0, 0.5, -0.5], atol=1 / 32768)
    assert sf.info(str(path)).subtype == "PCM_16"


def test_pcm24_round_trip_of_tone(tmp_path):
    path = tmp_path / "tone.wav"
    x = 0.9 * np.sin(2 * np.pi * 1000 * np.arange(1600) / FS)
    write_wav(AudioClip(x, FS), path, SampleFormat.PCM_24)
    assert sf.info(str(path)).subtype == "PCM_24"
    assert np.max(np.abs(read_wav(path).samples - x)) <= 2 ** -23 * 2


@pytest.mark.parametrize("sample_format", [SampleFormat.PCM_32, SampleFormat.FLOAT_32, "float32"])
def test_wide_formats_round_trip(tmp_path, rng, sample_format):
    path = tmp_path / "wide.wav"
    x = rng.uniform(-0.9, 0.9, 501)
    write_wav(AudioClip(x, 44100), path, sample_format)
    clip = read_wav(path)
    assert clip.sample_rate_hz == 44100
    np.testing.assert_allclose(clip.samples, x, atol=1e-7)


def test_integer_formats_clip_at_full_scale(tmp_path):
    path = tmp_path / "loud.wav"
    write_wav(AudioClip([1.5, -1.5, 0.25], FS), path)
    np.testing.assert_allclose(read_wav(path).samples, [1.0, -1.0, 0.25], atol=1 / 16384)


def test_output_is_wav_whatever_the_suffix(tmp_path):
    path = tmp_path / "rir.out"
    write_wav(AudioClip([0.1, 0.2], FS), path, SampleFormat.FLOAT_32)
    assert sf.info(str(path)).format == "WAV"
    assert len(read_wav(path)) == 2


def test_stereo_is_averaged(tmp_path):
    path = tmp_path / "stereo.wav"
    sf.write(str(path), np.array([[1.0, 0.0]] * 3), FS, subtype="PCM_16")
    np.testing.assert_allclose(read_wav(path).samples, [0.5, 0.5, 0.5], atol=1e-4)


def test_extensible_header_is_read(tmp_path):
    path = tmp_path / "ext.wav"
    sf.write(str(path), np.array([0.25, -0.25]), FS, subtype="PCM_24", format="WAVEX")
    np.testing.assert_allclose(read_wav(path).samples, [0.25, -0.25], atol=2 ** -22)


def test_garbage_is_malformed(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"JUNK" + bytes(40))
    with pytest.raises(MalformedWav):
        read_wav(path)


def test_header_without_chunks(tmp_path):
    path = tmp_path / "empty.wav"
    path.write_bytes(b"RIFF" + (4).to_bytes(4, "little") + b"WAVE")
    with pytest.raises(FormatError):
        read_wav(path)


@pytest.mark.parametrize("subtype", ["PCM_U8", "ULAW"])
def test_other_encodings_are_unsupported(tmp_path, subtype):
    path = tmp_path / "coded.wav"
    sf.write(str(path), np.zeros(8), FS, subtype=subtype, format="WAV")
    with pytest.raises(UnsupportedCodec, match=subtype):
        read_wav(path)


def test_other_containers_are_unsupported(tmp_path):
    path = tmp_path / "tone.flac"
    sf.write(str(path), np.zeros(8), FS, subtype="PCM_16", format="FLAC")
    with pytest.raises(UnsupportedCodec):
        read_wav(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(tmp_path / "nope.wav")
