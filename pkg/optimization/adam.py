"""
Adaptive-moment gradient descent with global-norm clipping.
"""

from typing import Dict, Optional

import numpy as np

from models import ParamKey
from numeric import Tensor


def global_grad_norm(params: Dict[ParamKey, Tensor]) -> float:
    total = 0.0
    for tensor in params.values():
        if tensor.grad is not None:
            total += float(np.sum(tensor.grad.astype(np.float64) ** 2))
    return float(np.sqrt(total))


def clip_grad_norm(params: Dict[ParamKey, Tensor], max_norm: float) -> float:
    """Rescale every gradient so their joint L2 norm is at most ``max_norm``; returns the norm before clipping."""
    if max_norm <= 0:
        raise ValueError(f"Clip norm must be > 0, got {max_norm}.")
    norm = global_grad_norm(params)
    if norm > max_norm:
        scale = max_norm / norm
        for tensor in params.values():
            if tensor.grad is not None:
                tensor.grad = tensor.grad * np.asarray(scale, dtype=tensor.grad.dtype)
    return norm


class AdamOptimizer:
    """
    Adam over the canonical tensors of a parameter store.

    Parameters
    ----------
    params : dict
        Canonical key -> Tensor (``dict(store.items())``). A tensor shared by
        several sites appears once and is updated once per step.
    lr, beta1, beta2, eps : float
        Step size, moment decay rates and denominator floor.
    """

    def __init__(self, params: Dict[ParamKey, Tensor], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise ValueError(f"Moment decay rates must lie in [0, 1), got beta1={beta1}, beta2={beta2}.")
        if lr <= 0 or eps <= 0:
            raise ValueError(f"lr and eps must be positive, got lr={lr}, eps={eps}.")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * g * g
            m_hat = self.m[key] / bc1
            v_hat = self.v[key] / bc2
            update = self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            p.data -= update.astype(p.dtype)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    # --- persistence ---
    def state_dict(self) -> Dict[str, np.ndarray]:
        state = {}
        for key in self.params:
            state[f"m/{key}"] = self.m[key]
            state[f"v/{key}"] = self.v[key]
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray], t: Optional[int] = None):
        """Restore moments saved by ``state_dict``; ``t`` is the number of steps already taken."""
        for key, p in self.params.items():
            for name, buffer in (("m", self.m), ("v", self.v)):
                saved = state.get(f"{name}/{key}")
                if saved is None:
                    raise KeyError(f"Optimizer state lacks '{name}/{key}'.")
                if saved.shape != p.shape:
                    raise ValueError(f"Optimizer moment {name}/{key} has shape {saved.shape}, expected {p.shape}.")
                buffer[key] = saved.astype(p.dtype, copy=True)
        if t is not None:
            self.t = int(t)
