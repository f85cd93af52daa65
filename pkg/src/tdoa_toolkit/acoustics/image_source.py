import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from tdoa_toolkit.acoustics.geometry import as_point
from tdoa_toolkit.acoustics.room import RoomSpec, DirectivityPattern, ImageSource
from tdoa_toolkit.dsp.filters import FRACTIONAL_DELAY_TAPS, fractional_delay_kernels
from tdoa_toolkit.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

MAX_ORDER = 20
RIR_LENGTH = 4096
MIN_SOURCE_DISTANCE = 1e-3


@dataclass(frozen=True)
class ImageSourceSet:
    """Column-wise storage of a shoebox image lattice; iterates as ImageSource values."""
    positions: np.ndarray
    generations: np.ndarray
    orientations: np.ndarray
    amplitude_factors: np.ndarray

    def __len__(self) -> int:
        return self.generations.shape[0]

    def __getitem__(self, index: int) -> ImageSource:
        return ImageSource(self.positions[index], int(self.generations[index]),
                           self.orientations[index], float(self.amplitude_factors[index]))

    def __iter__(self) -> Iterator[ImageSource]:
        return (self[i] for i in range(len(self)))


def _axis_images(coordinate: float, length: float, max_order: int):
    """Mirror coordinates along one axis: (position, reflection count, orientation sign)."""
    n = np.arange(-max_order, max_order + 1)
    rows = []
    for p in (0, 1):
        sign = 1 - 2 * p
        count = np.abs(2 * n - p)
        keep = count <= max_order
        rows.append((sign * coordinate + 2 * n[keep] * length, count[keep], np.full(keep.sum(), sign)))
    return tuple(np.concatenate(column) for column in zip(*rows))


def enumerate_image_sources(room: RoomSpec, src_pos, src_orient, max_order: int) -> ImageSourceSet:
    src_pos = as_point(src_pos)
    room.require_inside(src_pos, "source")
    if max_order < 0:
        raise InvalidArgumentError(f"max_order must be >= 0, got {max_order}")
    src_orient = as_point(src_orient)

    axes = [_axis_images(src_pos[axis], room.dims[axis], max_order) for axis in range(3)]
    grid = np.indices([len(axis[0]) for axis in axes]).reshape(3, -1).T
    generations = sum(axes[axis][1][grid[:, axis]] for axis in range(3))
    grid = grid[generations <= max_order]
    generations = generations[generations <= max_order]

    positions = np.stack([axes[axis][0][grid[:, axis]] for axis in range(3)], axis=1)
    signs = np.stack([axes[axis][2][grid[:, axis]] for axis in range(3)], axis=1)
    order = np.lexsort((positions[:, 2], positions[:, 1], positions[:, 0], generations))
    return ImageSourceSet(positions=positions[order], generations=generations[order].astype(np.int64),
                          orientations=signs[order] * src_orient,
                          amplitude_factors=room.reflection_coeff ** generations[order].astype(np.float64))


def compute_rir(room: RoomSpec, src_pos, src_directivity: DirectivityPattern, mic_pos,
                mic_directivity: DirectivityPattern, max_order: int = MAX_ORDER,
                rir_len_samples: int = RIR_LENGTH, images: ImageSourceSet | None = None) -> np.ndarray:
    """
    Shoebox impulse response from src_pos to mic_pos.

    Each image contributes r^g * G_mic * G_src / (4 pi d) at delay d / c * fs, placed
    with the fractional delay kernel. Arrivals past rir_len_samples are truncated.
    `images` may carry a precomputed lattice for src_pos.
    """
    src_pos, mic_pos = as_point(src_pos), as_point(mic_pos)
    room.require_inside(src_pos, "source")
    room.require_inside(mic_pos, "microphone")
    if rir_len_samples <= 0:
        raise InvalidArgumentError(f"RIR length must be positive, got {rir_len_samples}")

    direct = float(np.linalg.norm(src_pos - mic_pos))
    if direct < MIN_SOURCE_DISTANCE:
        raise InvalidArgumentError(f"source and microphone coincide (distance {direct:.2e} m)")
    direct_delay = direct / room.speed_of_sound * room.sample_rate_hz
    if direct_delay >= rir_len_samples:
        raise InvalidArgumentError(
            f"direct path arrives at sample {direct_delay:.1f}, beyond the {rir_len_samples}-sample RIR")

    if images is None:
        images = enumerate_image_sources(room, src_pos, src_directivity.orientation, max_order)

    taps = FRACTIONAL_DELAY_TAPS
    centre = (taps - 1) // 2
    offsets = images.positions - mic_pos
    distances = np.linalg.norm(offsets, axis=1)
    delays = distances / room.speed_of_sound * room.sample_rate_hz
    keep = delays < rir_len_samples + centre
    if not np.all(keep):
        log.debug("truncating %d of %d image arrivals beyond %d samples",
                  int((~keep).sum()), len(images), rir_len_samples)

    distances, delays = distances[keep], delays[keep]
    directions = offsets[keep] / distances[:, None]
    amplitudes = (images.amplitude_factors[keep]
                  * mic_directivity.gains(directions)
                  * src_directivity.gains(-directions, images.orientations[keep])
                  / (4.0 * np.pi * distances))

    whole = np.floor(delays)
    kernels = fractional_delay_kernels(delays - whole, taps) * amplitudes[:, None]
    index = whole.astype(np.int64)[:, None] + np.arange(taps)[None, :] - centre
    inside = (index >= 0) & (index < rir_len_samples)
    return np.bincount(index[inside], weights=kernels[inside], minlength=rir_len_samples)
