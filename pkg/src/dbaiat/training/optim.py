from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionError, NonFiniteError
from ..numerics import Tensor


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, weights: Mapping[str, Tensor]) -> "AdamState":
        return cls(
            {k: np.zeros_like(p.data) for k, p in weights.items()},
            {k: np.zeros_like(p.data) for k, p in weights.items()},
        )


def adam_step(
    weights: Mapping[str, Tensor],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """Bias-corrected Adam, applied to ``weights`` in place.

    A parameter whose gradient is missing or exactly zero is skipped, so its
    value and moments stay untouched; the step counter still advances.
    """
    for name, g in grads.items():
        if name not in weights:
            raise KeyError(f"gradient for unknown parameter {name!r}")
        if g.shape != weights[name].shape:
            raise DimensionError(f"gradient for {name} has shape {g.shape}, weight has {weights[name].shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {name}", where=name)
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name, p in weights.items():
        g = grads.get(name)
        if g is None or not g.any():
            continue
        m = state.m.setdefault(name, np.zeros_like(p.data))
        v = state.v.setdefault(name, np.zeros_like(p.data))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm
