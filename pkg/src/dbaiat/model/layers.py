"""Building blocks of the network. Every tensor is channels-last ``(B, T, F, C)``.

Each function takes a :class:`ParamScope` so the same code serves both
branches and every ATFAT level.
"""

from __future__ import annotations

from collections.abc import Sequence

from ..errors import ConfigurationError, ContractError, DimensionError
from ..numerics import (
    AttentionWeights,
    GRUWeights,
    Tensor,
    bigru_forward,
    concat,
    conv2d,
    layer_norm,
    linear,
    mean,
    multi_head_self_attention,
    pad,
    prelu,
    relu,
    reshape,
    sigmoid,
    softmax,
    tanh,
    transpose,
)
from .config import ModelConfig
from .weights import ParamScope


def conv_norm_act(x: Tensor, p: ParamScope, **conv_kw) -> Tensor:
    h = conv2d(x, p["conv.weight"], p["conv.bias"], **conv_kw)
    h = layer_norm(h, p["norm.gain"], p["norm.bias"])
    return prelu(h, p["act.slope"])


def dense_block(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """Dilated dense block; kernel (2, 3), causal in time, shape-preserving."""
    skip = x
    out = x
    for i, d in enumerate(config.dense_dilations):
        out = conv_norm_act(skip, p.scope(f"layer{i}"), dilation=(d, 1), padding=(d, 0, 1, 1))
        skip = concat([out, skip], axis=-1)
    return out


def dense_encoder_forward(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """``(B, T, F, Cin) -> (B, T, F', C)`` with ``Cin`` 1 (magnitude) or 2 (real/imag)."""
    cin = x.shape[-1]
    expected = p["conv_in.conv.weight"].shape[1]
    if cin not in (1, 2) or cin != expected:
        raise ConfigurationError(f"encoder expects {expected} input channel(s), got {cin}")
    h = conv_norm_act(x, p.scope("conv_in"))
    h = dense_block(h, p.scope("dense"), config)
    return conv_norm_act(h, p.scope("conv_out"), stride=(1, 2))


def fuse_encoders(mmb_feat: Tensor, crb_feat: Tensor, p: ParamScope) -> Tensor:
    if mmb_feat.shape != crb_feat.shape:
        raise DimensionError(f"encoder outputs differ: {mmb_feat.shape} vs {crb_feat.shape}")
    h = conv2d(concat([mmb_feat, crb_feat], axis=-1), p["conv.weight"], p["conv.bias"])
    return prelu(h, p["act.slope"])


def improved_transformer(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """Self-attention and a Bi-GRU feed-forward, each with residual and LN. ``x`` is (S, L, C)."""
    attn = AttentionWeights(*(p[f"attn.{n}.{k}"] for n in "qkvo" for k in ("weight", "bias")))
    h = layer_norm(x + multi_head_self_attention(x, attn, config.heads), p["norm1.gain"], p["norm1.bias"])
    fwd = GRUWeights(*(p[f"gru.fwd.{k}"] for k in ("w_ih", "w_hh", "b_ih", "b_hh")))
    bwd = GRUWeights(*(p[f"gru.bwd.{k}"] for k in ("w_ih", "w_hh", "b_ih", "b_hh")))
    ff = linear(relu(bigru_forward(h, fwd, bwd)), p["ffn.weight"], p["ffn.bias"])
    return layer_norm(h + ff, p["norm2.gain"], p["norm2.bias"])


def atfat_forward(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """Parallel time and frequency transformers mixed by alpha and beta."""
    B, T, F, C = x.shape
    along_time = reshape(transpose(x, (0, 2, 1, 3)), (B * F, T, C))
    at = improved_transformer(along_time, p.scope("time"), config)
    at = transpose(reshape(at, (B, F, T, C)), (0, 2, 1, 3))
    af = improved_transformer(reshape(x, (B * T, F, C)), p.scope("freq"), config)
    af = reshape(af, (B, T, F, C))
    mixed = p["alpha"] * at + p["beta"] * af
    return conv2d(prelu(mixed, p["post.act.slope"]), p["post.conv.weight"], p["post.conv.bias"])


def aha_forward(intermediates: Sequence[Tensor], p: ParamScope) -> tuple[Tensor, Tensor]:
    """Softmax-weighted sum of the ATFAT outputs added to the last one.

    Returns ``(output, weights)`` where ``weights`` is ``(B, N)``.
    """
    if not intermediates:
        raise ContractError("AHA needs at least one intermediate feature map")
    B = intermediates[0].shape[0]
    logits = []
    for n, feat in enumerate(intermediates):
        pooled = mean(feat, axis=(1, 2), keepdims=True)  # (B, 1, 1, C)
        proj = conv2d(pooled, p[f"aha.level{n}.weight"], p[f"aha.level{n}.bias"])
        logits.append(reshape(proj, (B, 1)))
    weights = softmax(concat(logits, axis=-1), axis=-1)
    context = None
    for n, feat in enumerate(intermediates):
        term = reshape(weights[:, n], (B, 1, 1, 1)) * feat
        context = term if context is None else context + term
    return intermediates[-1] + p["aha.gamma"] * context, weights


def aiat_forward(x: Tensor, p: ParamScope, config: ModelConfig) -> tuple[Tensor, Tensor]:
    intermediates = []
    h = x
    for n in range(config.n_atfat):
        h = atfat_forward(h, p.scope(f"atfat{n}"), config)
        intermediates.append(h)
    return aha_forward(intermediates, p)


def subpixel_upsample(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """Sub-pixel convolution doubling F', LN and PReLU, then zero bins up to F."""
    h = conv2d(x, p["subpixel.conv.weight"], p["subpixel.conv.bias"], padding=(0, 0, 1, 1))
    B, T, Fh, C2 = h.shape
    # channel block r of bin f lands on frequency 2f + r
    h = reshape(h, (B, T, 2 * Fh, C2 // 2))
    h = prelu(layer_norm(h, p["subpixel.norm.gain"], p["subpixel.norm.bias"]), p["subpixel.act.slope"])
    extra = config.freq_bins - 2 * Fh
    if extra < 0:
        raise DimensionError(f"upsampled {2 * Fh} bins exceed freq_bins={config.freq_bins}")
    return pad(h, ((0, 0), (0, 0), (0, extra), (0, 0)))


def _decode_trunk(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    return subpixel_upsample(dense_block(x, p.scope("dense"), config), p, config)


def mask_decoder_forward(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """``(B, T, F', C) -> (B, T, F, 1)`` gain in (0, 1)."""
    h = _decode_trunk(x, p, config)
    gate = tanh(conv2d(h, p["tanh_path.weight"], p["tanh_path.bias"])) * sigmoid(
        conv2d(h, p["sigmoid_path.weight"], p["sigmoid_path.bias"])
    )
    return sigmoid(conv2d(gate, p["out.weight"], p["out.bias"]))


def complex_decoder_forward(x: Tensor, p: ParamScope, config: ModelConfig) -> Tensor:
    """``(B, T, F', C) -> (B, T, F, 1)`` with a linear output."""
    return conv2d(_decode_trunk(x, p, config), p["out.weight"], p["out.bias"])
