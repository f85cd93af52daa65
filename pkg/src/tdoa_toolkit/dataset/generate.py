import logging
import os
import shutil
from pathlib import Path
from typing import Any, Iterator

import numpy as np
from tqdm import tqdm

from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dataset.container import DatasetWriter
from tdoa_toolkit.dataset.scenario import RoomRecording, sample_scenario, render_scenario, SOURCE_STREAM
from tdoa_toolkit.dataset.sounds import SoundPool, SyntheticPool
from tdoa_toolkit.utils import derive_seed, parallel_map

log = logging.getLogger(__name__)


def simulate_room(seed: int, config: GenerationConfig, pool: SoundPool, index: int = 0,
                  threads: int | None = 1) -> RoomRecording:
    spec = sample_scenario(seed, config)
    rng = np.random.default_rng(derive_seed(seed, SOURCE_STREAM))
    source, label = pool.draw(rng, config.total_len, config.sample_rate_hz)
    return render_scenario(spec, source, threads=threads, index=index, source_label=label)


def iter_rooms(config: GenerationConfig, master_seed: int, pool: SoundPool | None = None,
               threads: int | None = 1, indices=None) -> Iterator[RoomRecording]:
    """Rooms in index order; room `i` only depends on (master_seed, i, config, pool)."""
    pool = pool or SyntheticPool()
    indices = range(config.rooms) if indices is None else indices

    def build(index: int) -> RoomRecording:
        return simulate_room(derive_seed(master_seed, index), config, pool, index)

    yield from parallel_map(build, indices, threads)


def generate_dataset(root: str | os.PathLike, config: GenerationConfig, master_seed: int,
                     pool: SoundPool | None = None, threads: int | None = 1, progress: bool = True) -> dict[str, Any]:
    """
    Simulate `config.rooms` rooms and write them to `root`.

    On failure the partially written directory is removed and the error is
    re-raised, so a dataset directory is either complete or absent.
    """
    root = Path(root)
    existed = root.exists()
    pool = pool or SyntheticPool()
    log.info("generating %d rooms x %d mics into %s (master seed %d, pool %s)",
             config.rooms, config.mics, root, master_seed, pool.name)
    try:
        with DatasetWriter(root, config, master_seed) as writer:
            rooms = iter_rooms(config, master_seed, pool, threads)
            for recording in tqdm(rooms, total=config.rooms, desc="rooms", unit="room", disable=not progress):
                writer.append(recording)
    except BaseException:
        if existed:
            log.error("generation failed; %s is marked incomplete", root)
        else:
            log.error("generation failed; removing %s", root)
            shutil.rmtree(root, ignore_errors=True)
        raise
    return writer.manifest(complete=True)
