"""Central finite-difference oracle for analytic gradients."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from ..errors import ConfigurationError, NonFiniteError
from .tensor import Tensor, backward, topological_order


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))


def _check_finite(out: Tensor) -> None:
    if np.all(np.isfinite(out.data)):
        return
    for node in topological_order(out):
        if not np.all(np.isfinite(node.data)):
            raise NonFiniteError(f"non-finite value first produced by op '{node.op}'", where=node.op)
    raise NonFiniteError(f"non-finite value produced by op '{out.op}'", where=out.op)


def _sample_indices(size: int, max_coords: int | None, rng) -> np.ndarray:
    if max_coords is None or size <= max_coords:
        return np.arange(size)
    return np.sort(rng.choice(size, size=max_coords, replace=False))


def grad_check(
    f: Callable[[Tensor], Tensor],
    point,
    epsilon: float = 1e-4,
    max_coords: int | None = None,
    seed: int = 0,
) -> float:
    """Max over coordinates of ``|analytic - central| / max(1, |analytic|)``.

    ``f`` maps a tensor to a scalar tensor. With ``max_coords`` only a seeded
    subset of coordinates is probed.
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ConfigurationError(f"epsilon must lie in [1e-6, 1e-3], got {epsilon}")
    base = np.array(point.data if isinstance(point, Tensor) else point, dtype=np.float64)
    x = Tensor(base.copy(), requires_grad=True)
    out = f(x)
    _check_finite(out)
    backward(out)
    analytic = x.grad.reshape(-1) if x.grad is not None else np.zeros(base.size)

    idx = _sample_indices(base.size, max_coords, np.random.default_rng(seed))
    numeric = np.empty(len(idx))
    flat = base.reshape(-1)
    for n, i in enumerate(idx):
        plus, minus = flat.copy(), flat.copy()
        plus[i] += epsilon
        minus[i] -= epsilon
        fp = f(Tensor(plus.reshape(base.shape))).item()
        fm = f(Tensor(minus.reshape(base.shape))).item()
        numeric[n] = (fp - fm) / (2.0 * epsilon)
    if not np.all(np.isfinite(numeric)):
        raise NonFiniteError("finite-difference probe produced a non-finite loss")
    return float(_relative_error(analytic[idx], numeric).max(initial=0.0))


def grad_check_params(
    loss_fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    epsilon: float = 1e-5,
    max_coords_per_param: int | None = 2,
    seed: int = 0,
) -> dict[str, float]:
    """Finite-difference check of every named parameter used by ``loss_fn``.

    Parameters are perturbed in place and restored. Returns the max relative
    error per parameter name.
    """
    if not 1e-6 <= epsilon <= 1e-3:
        raise ConfigurationError(f"epsilon must lie in [1e-6, 1e-3], got {epsilon}")
    for p in params.values():
        p.grad = None
        p.requires_grad = True
    out = loss_fn()
    _check_finite(out)
    backward(out)
    rng = np.random.default_rng(seed)
    errors: dict[str, float] = {}
    for name, p in params.items():
        analytic = np.zeros(p.size) if p.grad is None else p.grad.reshape(-1)
        flat = p.data.reshape(-1)
        idx = _sample_indices(p.size, max_coords_per_param, rng)
        numeric = np.empty(len(idx))
        for n, i in enumerate(idx):
            original = flat[i]
            flat[i] = original + epsilon
            fp = loss_fn().item()
            flat[i] = original - epsilon
            fm = loss_fn().item()
            flat[i] = original
            numeric[n] = (fp - fm) / (2.0 * epsilon)
        errors[name] = float(_relative_error(analytic[idx], numeric).max(initial=0.0))
    return errors
