"""Finite-difference checks of every differentiable building block."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..dsp import ComplexSpectrogram
from ..model import TINY_CONFIG, ModelConfig, db_aiat_forward, init_weights
from ..numerics import (
    AttentionWeights,
    GRUWeights,
    Tensor,
    bigru_forward,
    conv2d,
    grad_check,
    grad_check_params,
    layer_norm,
    multi_head_self_attention,
    prelu,
    relu,
    sigmoid,
    softmax,
    tanh,
)
from ..training import loss_full

TOLERANCE = 1e-4
SMALL_CONFIG = ModelConfig(n_atfat=2, channels=16, freq_bins=41, heads=2, gru_hidden=8)


@dataclass(frozen=True)
class GradResult:
    name: str
    error: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.error < TOLERANCE


def _projection(out: Tensor, seed: int) -> Tensor:
    """Random linear functional so every output coordinate enters the check."""
    return (out * np.random.default_rng(seed).standard_normal(out.shape)).sum()


def _away_from_zero(rng, shape, margin=0.05):
    # keeps finite differences off the relu/prelu kink
    x = rng.standard_normal(shape)
    return x + np.where(x >= 0, margin, -margin)


def _primitive_checks(rng):
    # each entry: name, function of the checked tensor, point
    x4 = rng.standard_normal((2, 5, 7, 3))
    k = rng.standard_normal((4, 3, 2, 3)) * 0.5
    b = rng.standard_normal(4)
    conv_kw = dict(dilation=(2, 1), padding=(2, 0, 1, 1))
    yield "conv2d/input", lambda v: _projection(conv2d(v, Tensor(k), Tensor(b), **conv_kw), 1), x4
    yield "conv2d/kernel", lambda v: _projection(conv2d(Tensor(x4), v, Tensor(b), **conv_kw), 1), k
    yield "conv2d/strided", lambda v: _projection(conv2d(v, Tensor(k[:, :, :1]), stride=(1, 2)), 2), x4

    g, beta = rng.standard_normal(3) + 1.0, rng.standard_normal(3)
    yield "layer_norm/input", lambda v: _projection(layer_norm(v, Tensor(g), Tensor(beta)), 3), x4
    yield "layer_norm/gain", lambda v: _projection(layer_norm(Tensor(x4), v, Tensor(beta)), 3), g

    xa = _away_from_zero(rng, (4, 6))
    slope = np.array([0.25, -0.1, 0.4, 0.05, 0.3, 0.2])
    yield "prelu/input", lambda v: _projection(prelu(v, Tensor(slope)), 4), xa
    yield "prelu/slope", lambda v: _projection(prelu(Tensor(xa), v), 4), slope
    yield "sigmoid", lambda v: _projection(sigmoid(v), 5), xa * 3
    yield "tanh", lambda v: _projection(tanh(v), 6), xa
    yield "relu", lambda v: _projection(relu(v), 7), xa
    yield "softmax", lambda v: _projection(softmax(v, axis=-1), 8), xa * 2

    D, H = 3, 4
    seq = rng.standard_normal((2, 5, D))
    fw = [rng.standard_normal(s) * 0.5 for s in ((3 * H, D), (3 * H, H), (3 * H,), (3 * H,))]
    bw = [rng.standard_normal(s) * 0.5 for s in ((3 * H, D), (3 * H, H), (3 * H,), (3 * H,))]

    def gru_out(x, w_hh_fwd):
        f = GRUWeights(Tensor(fw[0]), w_hh_fwd, Tensor(fw[2]), Tensor(fw[3]))
        return _projection(bigru_forward(x, f, GRUWeights(*map(Tensor, bw))), 9)

    yield "bigru/input", lambda v: gru_out(v, Tensor(fw[1])), seq
    yield "bigru/recurrent", lambda v: gru_out(Tensor(seq), v), fw[1]

    C = 4
    mats = [rng.standard_normal(s) * 0.5 for s in [(C, C), (C,)] * 4]
    xs = rng.standard_normal((2, 5, C))

    def attn_out(x, q_w):
        return _projection(multi_head_self_attention(x, AttentionWeights(q_w, *map(Tensor, mats[1:])), heads=2), 10)

    yield "mhsa/input", lambda v: attn_out(v, Tensor(mats[0])), xs
    yield "mhsa/query", lambda v: attn_out(Tensor(xs), v), mats[0]


def end_to_end_check(config: ModelConfig = TINY_CONFIG, frames: int = 4, seed: int = 0,
                     coords_per_param: int = 2) -> float:
    """Largest per-parameter error of ``loss_full`` through the whole network."""
    rng = np.random.default_rng(seed)
    weights = init_weights(config, seed)
    # leave the special initial values (gamma = 0, unit gains) so every path is live
    for p in weights.values():
        p.data[...] = p.data + rng.normal(0.0, 0.3, p.shape)
    F = config.freq_bins
    noisy = ComplexSpectrogram(rng.standard_normal((1, frames, F)), rng.standard_normal((1, frames, F)),
                               compressed=True)
    clean = ComplexSpectrogram(rng.standard_normal((1, frames, F)), rng.standard_normal((1, frames, F)),
                               compressed=True)

    def loss():
        est, _ = db_aiat_forward(noisy, weights, config)
        return loss_full(est, clean, 0.5)

    errs = grad_check_params(loss, dict(weights), epsilon=1e-5, max_coords_per_param=coords_per_param, seed=seed)
    return max(errs.values())


def run_gradient_suite(tiny: bool = True, seed: int = 0) -> list[GradResult]:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn, point in _primitive_checks(rng):
        t0 = time.perf_counter()
        err = grad_check(fn, point, epsilon=1e-5)
        results.append(GradResult(name, err, time.perf_counter() - t0))
    t0 = time.perf_counter()
    if tiny:
        err = end_to_end_check(TINY_CONFIG, frames=4, seed=seed)
        name = "end_to_end/tiny"
    else:
        err = end_to_end_check(SMALL_CONFIG, frames=6, seed=seed, coords_per_param=1)
        name = "end_to_end/small"
    results.append(GradResult(name, err, time.perf_counter() - t0))
    return results
