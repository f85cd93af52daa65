import numpy as np

from tdoa_toolkit.acoustics.image_source import compute_rir, enumerate_image_sources, ImageSourceSet, MAX_ORDER, \
    RIR_LENGTH
from tdoa_toolkit.acoustics.room import RoomSpec, SourcePath, DirectivityPattern, discretize_path
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dsp.filters import convolve
from tdoa_toolkit.exceptions import InvalidArgumentError

PATH_SEGMENTS = 32


def segment_images(room: RoomSpec, path: SourcePath, src_directivity: DirectivityPattern, k: int,
                   max_order: int = MAX_ORDER) -> list[ImageSourceSet]:
    """Image lattices for each of the k path positions; shared by every microphone in a room."""
    positions = discretize_path(path, 1 if not path.is_moving else k)
    return [enumerate_image_sources(room, p, src_directivity.orientation, max_order) for p in positions]


def render_moving_source(room: RoomSpec, path: SourcePath, source_signal: AudioClip,
                         src_directivity: DirectivityPattern, mic_pos, mic_directivity: DirectivityPattern,
                         k: int = PATH_SEGMENTS, max_order: int = MAX_ORDER, preroll_samples: int = 0,
                         rir_len_samples: int = RIR_LENGTH,
                         images: list[ImageSourceSet] | None = None) -> AudioClip:
    """
    Sum over j of h(., j/k) * x_j, where x_j is the j-th of k equal parts of the signal
    (the last part zero-padded). The first `preroll_samples` of the result are dropped.
    """
    if k <= 0:
        raise InvalidArgumentError(f"number of path segments must be positive, got {k}")
    if source_signal.sample_rate_hz != room.sample_rate_hz:
        raise InvalidArgumentError(
            f"source is sampled at {source_signal.sample_rate_hz} Hz, room at {room.sample_rate_hz} Hz")
    n = len(source_signal.require_non_empty())
    if not 0 <= preroll_samples < n:
        raise InvalidArgumentError(f"pre-roll must lie in [0, {n}), got {preroll_samples}")
    path.require_inside(room)

    positions = discretize_path(path, k)
    for position in positions:
        room.require_inside(position, "path point")
    if images is None:
        images = segment_images(room, path, src_directivity, k, max_order)

    if not path.is_moving:
        rir = compute_rir(room, positions[0], src_directivity, mic_pos, mic_directivity, max_order,
                          rir_len_samples, images=images[0])
        rendered = convolve(source_signal.samples, rir)
        return AudioClip(rendered[preroll_samples:n], room.sample_rate_hz)

    segment = -(-n // k)
    padded = np.zeros(segment * k)
    padded[:n] = source_signal.samples
    rendered = np.zeros(segment * k + rir_len_samples - 1)
    for j, position in enumerate(positions):
        part = padded[j * segment:(j + 1) * segment]
        if not np.any(part):
            continue
        rir = compute_rir(room, position, src_directivity, mic_pos, mic_directivity, max_order,
                          rir_len_samples, images=images[j])
        rendered[j * segment:(j + 1) * segment + rir_len_samples - 1] += convolve(part, rir)
    return AudioClip(rendered[preroll_samples:n], room.sample_rate_hz)
