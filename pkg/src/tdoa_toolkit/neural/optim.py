import logging
from dataclasses import dataclass, field

import numpy as np

from tdoa_toolkit.exceptions import TrainingError, InvalidArgumentError
from tdoa_toolkit.neural.tensor import Tensor

log = logging.getLogger(__name__)


@dataclass
class AdamWState:
    step: int = 0
    exp_avg: dict[str, np.ndarray] = field(default_factory=dict)
    exp_avg_sq: dict[str, np.ndarray] = field(default_factory=dict)


def adamw_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray | None], state: AdamWState,
               lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
               weight_decay: float = 0.01) -> AdamWState:
    """
    One in-place AdamW update.

        theta <- theta - lr * weight_decay * theta
        theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)

    Decay is computed from theta before the step. A missing gradient counts as zero.
    """
    if state.step < 0:
        raise InvalidArgumentError(f"optimizer step count must be >= 0, got {state.step}")
    for name, grad in grads.items():
        if grad is not None and not np.all(np.isfinite(grad)):
            raise TrainingError("non-finite gradient", parameter=name)

    state.step += 1
    bias1 = 1.0 - beta1 ** state.step
    bias2 = 1.0 - beta2 ** state.step
    for name, theta in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(theta)
        m = state.exp_avg.get(name)
        v = state.exp_avg_sq.get(name)
        m = (1.0 - beta1) * grad if m is None else beta1 * m + (1.0 - beta1) * grad
        v = (1.0 - beta2) * grad * grad if v is None else beta2 * v + (1.0 - beta2) * grad * grad
        state.exp_avg[name] = m.astype(theta.dtype, copy=False)
        state.exp_avg_sq[name] = v.astype(theta.dtype, copy=False)

        update = lr * weight_decay * theta + lr * (m / bias1) / (np.sqrt(v / bias2) + eps)
        theta -= update.astype(theta.dtype, copy=False)
    return state


class AdamW:

    def __init__(self, params: dict[str, Tensor], lr: float = 1e-3, betas: tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 0.01, state: AdamWState | None = None):
        if lr < 0 or eps <= 0 or weight_decay < 0:
            raise InvalidArgumentError(f"invalid AdamW settings lr={lr} eps={eps} weight_decay={weight_decay}")
        self.params = params
        self.lr = lr
        self.betas = tuple(betas)
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = state or AdamWState()

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def step(self):
        adamw_step({name: p.data for name, p in self.params.items()},
                   {name: p.grad for name, p in self.params.items()},
                   self.state, self.lr, self.betas[0], self.betas[1], self.eps, self.weight_decay)
