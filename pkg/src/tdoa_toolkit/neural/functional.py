import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.neural.tensor import Function, Context, Tensor

_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Linear(Function):
    """y = x @ W.T + b with W of shape (out, in)."""

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
        ctx.save_for_backward(x, weight)
        return x @ weight.T + bias

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        x, weight = ctx.saved_tensors
        return grad_output @ weight, grad_output.T @ x, grad_output.sum(axis=0)


class Conv1d(Function):
    """Valid (unpadded) strided 1-d convolution: x (B, C_in, L), W (C_out, C_in, K), b (C_out,)."""

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, weight: np.ndarray, bias: np.ndarray, stride: int = 1) -> np.ndarray:
        kernel = weight.shape[2]
        windows = sliding_window_view(x, kernel, axis=2)[:, :, ::stride, :]
        ctx.save_for_backward(x, weight, windows)
        ctx.stride = stride
        return np.einsum("bclk,ock->bol", windows, weight, optimize=True) + bias[None, :, None]

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        x, weight, windows = ctx.saved_tensors
        stride = ctx.stride
        out_len = grad_output.shape[2]
        grad_weight = np.einsum("bol,bclk->ock", grad_output, windows, optimize=True)
        grad_bias = grad_output.sum(axis=(0, 2))
        grad_windows = np.einsum("bol,ock->bclk", grad_output, weight, optimize=True)
        grad_x = np.zeros_like(x)
        for k in range(weight.shape[2]):
            grad_x[:, :, k:k + stride * (out_len - 1) + 1:stride] += grad_windows[..., k]
        return grad_x, grad_weight, grad_bias


class Gelu(Function):
    """x * Phi(x) with the exact Gaussian CDF."""

    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        cdf = 0.5 * (1.0 + special.erf(x / _SQRT_2))
        ctx.save_for_backward(x, cdf)
        return x * cdf

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        x, cdf = ctx.saved_tensors
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        return grad_output * (cdf + x * pdf)


class Add(Function):

    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        return grad_output, grad_output


class Reshape(Function):

    @staticmethod
    def forward(ctx: Context, x: np.ndarray, shape: tuple[int, ...] = (-1,)) -> np.ndarray:
        ctx.input_shape = x.shape
        return x.reshape(shape)

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        return grad_output.reshape(ctx.input_shape)


def smoothed_targets(targets: np.ndarray, num_classes: int, smoothing: float, dtype=np.float64) -> np.ndarray:
    """(1 - eps) * onehot + eps / K; the uniform part includes the true class."""
    q = np.full((targets.shape[0], num_classes), smoothing / num_classes, dtype=dtype)
    q[np.arange(targets.shape[0]), targets] += 1.0 - smoothing
    return q


class CrossEntropyLabelSmoothing(Function):

    @staticmethod
    def forward(ctx: Context, logits: np.ndarray, targets: np.ndarray = None, smoothing: float = 0.0) -> np.ndarray:
        q = smoothed_targets(targets, logits.shape[1], smoothing, logits.dtype)
        log_probs = special.log_softmax(logits, axis=1)
        ctx.save_for_backward(np.exp(log_probs), q)
        return np.asarray(-np.sum(q * log_probs) / logits.shape[0], dtype=logits.dtype)

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray):
        probs, q = ctx.saved_tensors
        return grad_output * (probs - q) / probs.shape[0]


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    if x.shape[-1] != weight.shape[1]:
        raise InvalidArgumentError(f"linear layer expects {weight.shape[1]} input features, got shape {x.shape}")
    return Linear.apply(x, weight, bias)


def conv1d(x: Tensor, weight: Tensor, bias: Tensor, stride: int = 1) -> Tensor:
    if x.ndim != 3 or x.shape[1] != weight.shape[1]:
        raise InvalidArgumentError(
            f"conv1d expects input of shape (batch, {weight.shape[1]}, length), got {x.shape}")
    if x.shape[2] < weight.shape[2]:
        raise InvalidArgumentError(f"conv1d input length {x.shape[2]} is shorter than the kernel {weight.shape[2]}")
    return Conv1d.apply(x, weight, bias, stride=stride)


def gelu(x: Tensor) -> Tensor:
    return Gelu.apply(x)


def add(a: Tensor, b: Tensor) -> Tensor:
    return Add.apply(a, b)


def flatten(x: Tensor) -> Tensor:
    return Reshape.apply(x, shape=(x.shape[0], -1))


def loss_ce_label_smoothing(logits: Tensor, targets, smoothing: float = 0.1) -> Tensor:
    """Mean over the batch of -sum_k q_k log softmax(logits)_k."""
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if logits.ndim != 2 or logits.shape[0] != targets.shape[0]:
        raise InvalidArgumentError(f"logits of shape {logits.shape} do not match {targets.shape[0]} targets")
    if not 0.0 <= smoothing < 1.0:
        raise InvalidArgumentError(f"label smoothing must lie in [0, 1), got {smoothing}")
    if targets.size and (targets.min() < 0 or targets.max() >= logits.shape[1]):
        raise InvalidArgumentError(f"target classes must lie in [0, {logits.shape[1]})")
    return CrossEntropyLabelSmoothing.apply(logits, targets=targets, smoothing=smoothing)


def softmax(logits) -> np.ndarray:
    data = logits.data if isinstance(logits, Tensor) else np.asarray(logits)
    return special.softmax(data, axis=-1)
