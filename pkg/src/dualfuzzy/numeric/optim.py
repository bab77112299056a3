"""Adam with stepwise (staircase) learning-rate decay."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import NonFiniteError, ShapeError


@dataclass
class AdamState:
    lr: float = 1e-3
    decay_rate: float = 0.7
    decay_steps: int = 200_000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def effective_lr(self, step: int | None = None) -> float:
        step = self.step if step is None else step
        return self.lr * self.decay_rate ** (step // self.decay_steps)


def adam_step(state: AdamState, params: dict, grads: dict) -> tuple[dict, AdamState]:
    """Apply one Adam update and return ``(new_params, state)``.

    The learning rate used for this update is evaluated at the pre-increment
    step count, so the first update after ``decay_steps`` updates is the first
    to see the decayed rate.  ``state`` is updated in place and also returned.
    """
    if state.step < 0:
        raise ValueError(f"negative step count {state.step}")
    if set(params) != set(grads):
        raise KeyError(f"parameter/gradient names differ: {sorted(set(params) ^ set(grads))}")
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        if g.shape != np.shape(p):
            raise ShapeError(f"adam_step[{name}]", np.shape(p), g.shape)
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(-1, f"adam_step gradient for {name!r}")

    lr = state.effective_lr()
    t = state.step + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    new = {}
    for name, p in params.items():
        p = np.asarray(p, dtype=np.float64)
        g = np.asarray(grads[name], dtype=np.float64)
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        new[name] = p - lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    state.step = t
    return new, state
