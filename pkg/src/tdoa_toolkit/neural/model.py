import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from tdoa_toolkit.dsp.spectral import bins_below
from tdoa_toolkit.enums import FrontendNorm, Preset
from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.neural import functional as F
from tdoa_toolkit.neural.tensor import Tensor
from tdoa_toolkit.utils import strict_from_dict, content_hash

log = logging.getLogger(__name__)

FEATURE_CHANNELS = 4
_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass
class ModelConfig:
    """
    Shape of the network

        features (batch, 4, bins)
          -> conv_layers, each followed by GELU
          -> flatten -> linear projection to hidden_width
          -> num_blocks residual blocks  h + fc2(gelu(fc1(gelu(h))))
          -> linear classifier to num_classes logits

    where bins is the number of rfft bins of an input_len clip strictly below f_max_hz.
    """
    f_max_hz: float = 4800.0
    input_len: int = 10000
    sample_rate_hz: int = 16000
    conv_layers: tuple[tuple[int, int, int, int], ...] = ((4, 32, 7, 4), (32, 64, 7, 4), (64, 128, 7, 4))
    hidden_width: int = 256
    num_blocks: int = 4
    num_classes: int = 1000
    parameter_dtype: str = "float32"
    frontend_norm: FrontendNorm = FrontendNorm.NONE

    def __post_init__(self):
        self.conv_layers = tuple(tuple(int(v) for v in layer) for layer in self.conv_layers)
        self.frontend_norm = FrontendNorm(self.frontend_norm)
        if self.parameter_dtype not in _DTYPES:
            raise InvalidArgumentError(f"parameter_dtype must be one of {sorted(_DTYPES)}, got {self.parameter_dtype}")
        if not 0 < self.f_max_hz < self.sample_rate_hz / 2:
            raise InvalidArgumentError(f"f_max must lie in (0, {self.sample_rate_hz / 2}) Hz, got {self.f_max_hz}")
        if self.num_classes <= 0 or self.num_classes % 2:
            raise InvalidArgumentError(f"num_classes must be a positive even number, got {self.num_classes}")
        if self.hidden_width <= 0 or self.num_blocks < 0:
            raise InvalidArgumentError("hidden_width must be positive and num_blocks non-negative")

        channels = FEATURE_CHANNELS
        for index, (c_in, c_out, kernel, stride) in enumerate(self.conv_layers):
            if c_in != channels:
                raise InvalidArgumentError(f"conv layer {index} expects {c_in} channels, previous layer gives {channels}")
            if min(c_out, kernel, stride) <= 0:
                raise InvalidArgumentError(f"conv layer {index} has a non-positive size: {self.conv_layers[index]}")
            channels = c_out
        if self.conv_output_lengths[-1] <= 0:
            raise InvalidArgumentError(f"{self.num_bins} bins are too few for the conv stack {self.conv_layers}")

    @property
    def dtype(self) -> type:
        return _DTYPES[self.parameter_dtype]

    @property
    def num_bins(self) -> int:
        return bins_below(self.f_max_hz, self.input_len, self.sample_rate_hz)

    @property
    def feature_shape(self) -> tuple[int, int]:
        return FEATURE_CHANNELS, self.num_bins

    @property
    def conv_output_lengths(self) -> list[int]:
        lengths, length = [], self.num_bins
        for _, _, kernel, stride in self.conv_layers:
            length = (length - kernel) // stride + 1 if length >= kernel else 0
            lengths.append(length)
        return lengths or [length]

    @property
    def flat_dim(self) -> int:
        channels = self.conv_layers[-1][1] if self.conv_layers else FEATURE_CHANNELS
        return channels * self.conv_output_lengths[-1]

    def parameter_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        for index, (c_in, c_out, kernel, _) in enumerate(self.conv_layers):
            shapes[f"conv{index}.weight"] = (c_out, c_in, kernel)
            shapes[f"conv{index}.bias"] = (c_out,)
        shapes["proj.weight"] = (self.hidden_width, self.flat_dim)
        shapes["proj.bias"] = (self.hidden_width,)
        for index in range(self.num_blocks):
            for layer in ("fc1", "fc2"):
                shapes[f"block{index}.{layer}.weight"] = (self.hidden_width, self.hidden_width)
                shapes[f"block{index}.{layer}.bias"] = (self.hidden_width,)
        shapes["head.weight"] = (self.num_classes, self.hidden_width)
        shapes["head.bias"] = (self.num_classes,)
        return shapes

    @property
    def num_parameters(self) -> int:
        return int(sum(np.prod(shape) for shape in self.parameter_shapes().values()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "f_max_hz": self.f_max_hz,
            "input_len": self.input_len,
            "sample_rate_hz": self.sample_rate_hz,
            "conv_layers": [list(layer) for layer in self.conv_layers],
            "hidden_width": self.hidden_width,
            "num_blocks": self.num_blocks,
            "num_classes": self.num_classes,
            "parameter_dtype": self.parameter_dtype,
            "frontend_norm": self.frontend_norm.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelConfig":
        return strict_from_dict(cls, data)

    @property
    def config_hash(self) -> str:
        return content_hash(self.to_dict())

    @classmethod
    def preset(cls, name: Preset | str) -> "ModelConfig":
        name = Preset(name)
        if name == Preset.DESK:
            return cls()
        if name == Preset.PAPER:
            return cls(hidden_width=1200)
        return cls(f_max_hz=4000.0, input_len=64, conv_layers=((4, 4, 3, 2), (4, 4, 3, 2), (4, 4, 3, 2)),
                   hidden_width=8, num_blocks=2, num_classes=10, parameter_dtype="float64")


def init_params(config: ModelConfig, seed: int) -> dict[str, Tensor]:
    """Fan-in scaled uniform weights in +-1/sqrt(fan_in), zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in config.parameter_shapes().items():
        if name.endswith(".bias"):
            data = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(np.prod(shape[1:]))
            data = rng.uniform(-bound, bound, size=shape)
        params[name] = Tensor(data.astype(config.dtype), requires_grad=True, name=name)
    log.debug("initialised %d parameters (seed %d)", config.num_parameters, seed)
    return params


def check_params(config: ModelConfig, params: dict[str, Tensor]):
    expected = config.parameter_shapes()
    if set(params) != set(expected):
        missing, extra = sorted(set(expected) - set(params)), sorted(set(params) - set(expected))
        raise InvalidArgumentError(f"parameter names do not match the config (missing {missing}, unexpected {extra})")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise InvalidArgumentError(f"parameter {name} has shape {params[name].shape}, expected {shape}")


def forward(config: ModelConfig, params: dict[str, Tensor], features) -> Tensor:
    if not isinstance(features, Tensor):
        features = Tensor(np.asarray(features, dtype=config.dtype))
    expected = config.feature_shape
    if features.ndim != 3 or features.shape[1:] != expected:
        raise InvalidArgumentError(f"features must have shape (batch, {expected[0]}, {expected[1]}), "
                                   f"got {features.shape}")
    if features.dtype != config.dtype:
        features = Tensor(features.data.astype(config.dtype), requires_grad=features.requires_grad)

    h = features
    for index, (_, _, _, stride) in enumerate(config.conv_layers):
        h = F.gelu(F.conv1d(h, params[f"conv{index}.weight"], params[f"conv{index}.bias"], stride))
    h = F.linear(F.flatten(h), params["proj.weight"], params["proj.bias"])
    for index in range(config.num_blocks):
        inner = F.linear(F.gelu(h), params[f"block{index}.fc1.weight"], params[f"block{index}.fc1.bias"])
        inner = F.linear(F.gelu(inner), params[f"block{index}.fc2.weight"], params[f"block{index}.fc2.bias"])
        h = F.add(h, inner)
    return F.linear(h, params["head.weight"], params["head.bias"])


class TdoaNetwork:
    """A ModelConfig bound to its parameters."""

    def __init__(self, config: ModelConfig, params: dict[str, Tensor]):
        check_params(config, params)
        self.config = config
        self.params = params

    @classmethod
    def from_seed(cls, config: ModelConfig, seed: int) -> "TdoaNetwork":
        return cls(config, init_params(config, seed))

    def __call__(self, features) -> Tensor:
        return forward(self.config, self.params, features)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.params.items()}

    def __repr__(self):
        return f"<TdoaNetwork {self.config.num_parameters} parameters, {self.config.num_classes} classes>"
