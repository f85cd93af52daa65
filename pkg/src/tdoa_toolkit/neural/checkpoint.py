"""
Checkpoint file layout (all integers little-endian)::

    magic        8 bytes  b"TDOACKPT"
    header_len   u64
    header       header_len bytes of canonical UTF-8 JSON
    blobs        raw tensor data, back to back in header order

The header carries ``schema_version``, ``config`` (ModelConfig.to_dict()),
``metadata``, ``optimizer_step`` and ``tensors``: a list of
``{name, dtype, shape, offset, nbytes}`` with offsets relative to the start
of the blob area. Parameters come first under their own names, Adam moments
follow as ``optimizer.exp_avg.<name>`` and ``optimizer.exp_avg_sq.<name>``.
"""
import json
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from tdoa_toolkit.exceptions import FormatError
from tdoa_toolkit.neural.model import ModelConfig, TdoaNetwork, check_params
from tdoa_toolkit.neural.optim import AdamWState
from tdoa_toolkit.neural.tensor import Tensor
from tdoa_toolkit.utils import canonical_json

log = logging.getLogger(__name__)

MAGIC = b"TDOACKPT"
SCHEMA_VERSION = 1
_PREAMBLE = struct.Struct("<8sQ")
_EXP_AVG = "optimizer.exp_avg."
_EXP_AVG_SQ = "optimizer.exp_avg_sq."
_STORED_DTYPES = {"float32": "<f4", "float64": "<f8"}


@dataclass(eq=False)
class Checkpoint:
    config: ModelConfig
    params: dict[str, np.ndarray]
    optimizer: AdamWState | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def network(self) -> TdoaNetwork:
        tensors = {name: Tensor(array, requires_grad=True, name=name) for name, array in self.params.items()}
        return TdoaNetwork(self.config, tensors)

    @classmethod
    def from_network(cls, network: TdoaNetwork, optimizer: AdamWState | None = None,
                     metadata: dict[str, Any] | None = None) -> "Checkpoint":
        return cls(network.config, {name: p.data.copy() for name, p in network.params.items()},
                   optimizer, dict(metadata or {}))

    def _tensors(self) -> list[tuple[str, np.ndarray]]:
        tensors = list(self.params.items())
        if self.optimizer is not None:
            tensors += [(_EXP_AVG + name, self.optimizer.exp_avg[name]) for name in self.params
                        if name in self.optimizer.exp_avg]
            tensors += [(_EXP_AVG_SQ + name, self.optimizer.exp_avg_sq[name]) for name in self.params
                        if name in self.optimizer.exp_avg_sq]
        return tensors

    def to_bytes(self) -> bytes:
        directory, blobs, offset = [], [], 0
        for name, array in self._tensors():
            dtype = np.dtype(array.dtype).name
            if dtype not in _STORED_DTYPES:
                raise FormatError(f"tensor {name} has unsupported dtype {dtype}")
            raw = np.ascontiguousarray(array, dtype=_STORED_DTYPES[dtype]).tobytes()
            directory.append({"name": name, "dtype": dtype, "shape": list(array.shape), "offset": offset,
                              "nbytes": len(raw)})
            blobs.append(raw)
            offset += len(raw)
        header = canonical_json({
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "metadata": self.metadata,
            "optimizer_step": None if self.optimizer is None else self.optimizer.step,
            "tensors": directory,
        }).encode()
        return _PREAMBLE.pack(MAGIC, len(header)) + header + b"".join(blobs)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if len(data) < _PREAMBLE.size:
            raise FormatError("checkpoint is shorter than its preamble", offset=0)
        magic, header_len = _PREAMBLE.unpack_from(data)
        if magic != MAGIC:
            raise FormatError(f"bad checkpoint magic {magic!r}", offset=0)
        start = _PREAMBLE.size + header_len
        if len(data) < start:
            raise FormatError(f"checkpoint header claims {header_len} bytes", offset=_PREAMBLE.size)
        try:
            header = json.loads(data[_PREAMBLE.size:start].decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise FormatError(f"checkpoint header is not valid JSON: {e}", offset=_PREAMBLE.size) from None
        if header.get("schema_version") != SCHEMA_VERSION:
            raise FormatError(f"checkpoint schema version {header.get('schema_version')} is not {SCHEMA_VERSION}",
                              offset=_PREAMBLE.size)

        tensors = {}
        for entry in header["tensors"]:
            begin = start + entry["offset"]
            end = begin + entry["nbytes"]
            if end > len(data):
                raise FormatError(f"tensor {entry['name']} is truncated", offset=begin)
            stored = np.frombuffer(data[begin:end], dtype=_STORED_DTYPES[entry["dtype"]])
            tensors[entry["name"]] = stored.astype(entry["dtype"]).reshape(entry["shape"])

        params = {name: array for name, array in tensors.items() if not name.startswith("optimizer.")}
        optimizer = None
        if header["optimizer_step"] is not None:
            optimizer = AdamWState(
                step=header["optimizer_step"],
                exp_avg={n[len(_EXP_AVG):]: a for n, a in tensors.items() if n.startswith(_EXP_AVG)},
                exp_avg_sq={n[len(_EXP_AVG_SQ):]: a for n, a in tensors.items() if n.startswith(_EXP_AVG_SQ)},
            )
        config = ModelConfig.from_dict(header["config"])
        check_params(config, {name: Tensor(a) for name, a in params.items()})
        return cls(config, params, optimizer, header["metadata"])


def save_checkpoint(checkpoint: Checkpoint, path: str | os.PathLike):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(checkpoint.to_bytes())
    tmp.replace(path)
    log.info("checkpoint written to %s", path)


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    return Checkpoint.from_bytes(Path(path).read_bytes())
