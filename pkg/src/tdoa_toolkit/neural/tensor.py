import threading
from contextlib import contextmanager
from typing import Any, Iterator

import numpy as np

from tdoa_toolkit.exceptions import StateError, InvalidArgumentError

_state = threading.local()


def is_grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable graph recording in the current thread."""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


class Tensor:
    """
    An ndarray plus what reverse-mode differentiation needs to know about it.

    Leaf tensors are created by the user; every other tensor records the
    Context of the Function that produced it. ``backward`` walks those
    contexts from the loss to the leaves and accumulates ``grad`` on every
    leaf that has ``requires_grad`` set.
    """

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data)
        if not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name
        self._ctx: Context | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._ctx is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, name=self.name)

    def zero_grad(self):
        self.grad = None

    def backward(self, grad: np.ndarray | None = None):
        backward(self, grad)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} dtype={self.dtype} requires_grad={self.requires_grad}>"


class Context:
    """Per-call scratch space handed to Function.forward and Function.backward."""

    def __init__(self, function: type["Function"], inputs: tuple[Tensor, ...]):
        self.function = function
        self.inputs = inputs
        self.saved_tensors: tuple[np.ndarray, ...] = ()
        self.needs_input_grad = tuple(t.requires_grad for t in inputs)

    def save_for_backward(self, *arrays: np.ndarray):
        self.saved_tensors = arrays


class Function:
    """
    Base class of differentiable operations. Subclasses implement

        forward(ctx, *arrays, **options) -> ndarray
        backward(ctx, grad_output) -> one gradient (or None) per array input

    and are called through ``apply``.
    """

    @staticmethod
    def forward(ctx: Context, *args: np.ndarray, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def backward(ctx: Context, grad_output: np.ndarray) -> tuple[np.ndarray | None, ...]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs, **kwargs) -> Tensor:
        tensors = tuple(x if isinstance(x, Tensor) else Tensor(x) for x in inputs)
        ctx = Context(cls, tensors)
        out = Tensor(cls.forward(ctx, *(t.data for t in tensors), **kwargs))
        if is_grad_enabled() and any(ctx.needs_input_grad):
            out.requires_grad = True
            out._ctx = ctx
        return out


def _topological_order(root: Tensor) -> list[Tensor]:
    order, visited = [], set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node._ctx is not None:
            stack.extend((parent, False) for parent in node._ctx.inputs if id(parent) not in visited)
    return order[::-1]


def backward(loss: Tensor, grad: np.ndarray | None = None):
    """
    Accumulate d(loss)/d(leaf) into ``leaf.grad`` for every reachable leaf with requires_grad.

    The recorded graph is released afterwards; a second call on the same loss raises StateError.
    """
    if loss._ctx is None:
        raise StateError("backward() needs a tensor produced by a recorded forward pass")
    if grad is None:
        if loss.size != 1:
            raise InvalidArgumentError(f"backward() without a gradient needs a scalar, got shape {loss.shape}")
        grad = np.ones_like(loss.data)
    grads: dict[int, np.ndarray] = {id(loss): np.asarray(grad, dtype=loss.dtype)}

    for node in _topological_order(loss):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        ctx = node._ctx
        if ctx is None:
            if node.requires_grad:
                node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        input_grads = ctx.function.backward(ctx, g)
        if not isinstance(input_grads, tuple):
            input_grads = (input_grads,)
        for parent, parent_grad, needed in zip(ctx.inputs, input_grads, ctx.needs_input_grad):
            if parent_grad is None or not needed:
                continue
            key = id(parent)
            grads[key] = parent_grad if key not in grads else grads[key] + parent_grad
        node._ctx = None
