"""Fused network primitives with hand-written backward passes.

All feature maps are channels-last: convolution inputs are ``(B, T, F, C)``
and sequence inputs are ``(S, L, D)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DimensionError
from .tensor import DTYPE, Tensor, as_tensor, concat, getitem, make_node, matmul, reshape, transpose

LN_EPS = 1e-5


def _pair(v) -> tuple[int, int]:
    if isinstance(v, int):
        return v, v
    a, b = v
    return int(a), int(b)


def conv_output_size(n: int, k: int, stride: int, dilation: int, pad_before: int, pad_after: int) -> int:
    return (n + pad_before + pad_after - dilation * (k - 1) - 1) // stride + 1


def conv2d(
    x: Tensor,
    kernel: Tensor,
    bias: Tensor | None = None,
    stride=(1, 1),
    dilation=(1, 1),
    padding=(0, 0, 0, 0),
) -> Tensor:
    """2-D cross-correlation on a ``(B, T, F, Cin)`` input.

    ``kernel`` is laid out ``(Cout, Cin, Kt, Kf)``; ``padding`` is
    ``(t_before, t_after, f_before, f_after)`` zero padding.
    """
    x, kernel = as_tensor(x), as_tensor(kernel)
    if x.ndim != 4 or kernel.ndim != 4:
        raise DimensionError(f"conv2d expects 4-D input and kernel, got {x.shape} and {kernel.shape}")
    B, T, F, cin = x.shape
    cout, kcin, kt, kf = kernel.shape
    if cin != kcin:
        raise DimensionError(
            f"conv2d channel mismatch: input {x.shape} has Cin={cin}, kernel {kernel.shape} expects {kcin}"
        )
    st, sf = _pair(stride)
    dt, df = _pair(dilation)
    if min(st, sf, dt, df) < 1:
        raise ConfigurationError(f"strides and dilations must be >= 1, got {stride}, {dilation}")
    pt0, pt1, pf0, pf1 = (int(p) for p in padding)
    t_out = conv_output_size(T, kt, st, dt, pt0, pt1)
    f_out = conv_output_size(F, kf, sf, df, pf0, pf1)
    if t_out < 1 or f_out < 1:
        raise DimensionError(f"conv2d kernel {kernel.shape} larger than padded input {x.shape}")

    xp = x.data
    if pt0 or pt1 or pf0 or pf1:
        xp = np.pad(xp, ((0, 0), (pt0, pt1), (pf0, pf1), (0, 0)))
    w = kernel.data
    # contiguous (Kt, Kf, Cin, Cout) taps keep every product on the BLAS path
    taps = np.ascontiguousarray(w.transpose(2, 3, 1, 0))
    n_pos = B * t_out * f_out

    def tap(i, j):
        t0, f0 = i * dt, j * df
        return (slice(None), slice(t0, t0 + st * (t_out - 1) + 1, st), slice(f0, f0 + sf * (f_out - 1) + 1, sf))

    out = np.zeros((B, t_out, f_out, cout), dtype=DTYPE)
    for i in range(kt):
        for j in range(kf):
            out += xp[tap(i, j)] @ taps[i, j]
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data

    def _bw(g):
        g2 = g.reshape(n_pos, cout)
        gx = gw = gb = None
        if x.requires_grad:
            gxp = np.zeros_like(xp)
        if kernel.requires_grad:
            gw = np.zeros_like(w)
        for i in range(kt):
            for j in range(kf):
                sl = tap(i, j)
                if kernel.requires_grad:
                    cols = np.ascontiguousarray(xp[sl]).reshape(n_pos, cin)
                    gw[:, :, i, j] = (cols.T @ g2).T
                if x.requires_grad:
                    gxp[sl] += (g2 @ taps[i, j].T).reshape(B, t_out, f_out, cin)
        if x.requires_grad:
            gx = np.ascontiguousarray(gxp[:, pt0:pt0 + T, pf0:pf0 + F, :])
        if bias is not None and bias.requires_grad:
            gb = g2.sum(axis=0)
        return gx, gw, gb

    parents = (x, kernel) if bias is None else (x, kernel, bias)
    return make_node(out, parents, _bw, "conv2d")


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """``x @ weight.T + bias`` over the last axis; ``weight`` is ``(out, in)``."""
    x, weight = as_tensor(x), as_tensor(weight)
    if x.shape[-1] != weight.shape[1]:
        raise DimensionError(f"linear: input {x.shape} does not match weight {weight.shape}")
    lead = x.shape[:-1]
    x2 = x.data.reshape(-1, x.shape[-1])
    out = x2 @ weight.data.T
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data

    def _bw(g):
        g2 = g.reshape(-1, weight.shape[0])
        gx = (g2 @ weight.data).reshape(x.shape) if x.requires_grad else None
        gw = g2.T @ x2 if weight.requires_grad else None
        gb = g2.sum(axis=0) if bias is not None and bias.requires_grad else None
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    return make_node(out.reshape(lead + (weight.shape[0],)), parents, _bw, "linear")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LN_EPS) -> Tensor:
    """Normalise over the last axis, then apply the per-channel affine map."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    if gain.shape != (x.shape[-1],) or bias.shape != (x.shape[-1],):
        raise DimensionError(f"layer_norm: input {x.shape} vs gain {gain.shape}, bias {bias.shape}")
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def _bw(g):
        gx = gg = gb = None
        if x.requires_grad:
            dxhat = g * gain.data
            gx = inv * (
                dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            )
        if gain.requires_grad:
            gg = (g * xhat).reshape(-1, x.shape[-1]).sum(axis=0)
        if bias.requires_grad:
            gb = g.reshape(-1, x.shape[-1]).sum(axis=0)
        return gx, gg, gb

    return make_node(out, (x, gain, bias), _bw, "layer_norm")


# ---------------------------------------------------------------- activations
def prelu(x: Tensor, slope: Tensor) -> Tensor:
    x, slope = as_tensor(x), as_tensor(slope)
    if slope.ndim != 1 or slope.shape[0] not in (1, x.shape[-1]):
        raise DimensionError(f"prelu: slope {slope.shape} incompatible with input {x.shape}")
    xd, a = x.data, slope.data
    neg = xd < 0
    out = np.where(neg, xd * a, xd)

    def _bw(g):
        gx = np.where(neg, g * a, g) if x.requires_grad else None
        ga = None
        if slope.requires_grad:
            ga = _reduce_to_channels(np.where(neg, g * xd, 0.0), slope.shape[0])
        return gx, ga

    return make_node(out, (x, slope), _bw, "prelu")


def _reduce_to_channels(g: np.ndarray, channels: int) -> np.ndarray:
    if channels == 1:
        return np.array([g.sum()])
    return g.reshape(-1, channels).sum(axis=0)


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    xd = x.data
    out = np.empty_like(xd)
    pos = xd >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-xd[pos]))
    ez = np.exp(xd[~pos])
    out[~pos] = ez / (1.0 + ez)

    def _bw(g):
        return (g * out * (1.0 - out),)

    return make_node(out, (x,), _bw, "sigmoid")


def tanh(x: Tensor) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)

    def _bw(g):
        return (g * (1.0 - out * out),)

    return make_node(out, (x,), _bw, "tanh")


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    pos = x.data > 0

    def _bw(g):
        return (g * pos,)

    return make_node(x.data * pos, (x,), _bw, "relu")


def apply_activation(kind: str, x: Tensor, slope: Tensor | None = None) -> Tensor:
    """Dispatch on ``kind`` in ``{"prelu", "sigmoid", "tanh", "relu"}``."""
    if kind == "prelu":
        if slope is None:
            raise ConfigurationError("prelu activation requires a slope tensor")
        return prelu(x, slope)
    if slope is not None:
        raise ConfigurationError(f"{kind} activation takes no slope")
    try:
        fn = {"sigmoid": sigmoid, "tanh": tanh, "relu": relu}[kind]
    except KeyError:
        raise ConfigurationError(f"unknown activation {kind!r}") from None
    return fn(x)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def _bw(g):
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return make_node(out, (x,), _bw, "softmax")


# ----------------------------------------------------------------------- GRU
@dataclass
class GRUWeights:
    """One direction of a GRU. Gate rows are stacked in the order reset, update, candidate."""

    w_ih: Tensor  # (3H, D)
    w_hh: Tensor  # (3H, H)
    b_ih: Tensor  # (3H,)
    b_hh: Tensor  # (3H,)

    @property
    def hidden(self) -> int:
        return self.w_hh.shape[1]


def _sig(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def gru(x: Tensor, w: GRUWeights) -> Tensor:
    """Unidirectional GRU over ``(S, L, D)`` with zero initial state.

    r = s(W_ir x + b_ir + W_hr h + b_hr)
    z = s(W_iz x + b_iz + W_hz h + b_hz)
    n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
    h' = (1 - z) * n + z * h
    """
    x = as_tensor(x)
    S, L, D = x.shape
    H = w.hidden
    if w.w_ih.shape != (3 * H, D):
        raise DimensionError(f"gru: input feature {D} does not match w_ih {w.w_ih.shape}")
    wih, whh, bih, bhh = w.w_ih.data, w.w_hh.data, w.b_ih.data, w.b_hh.data
    gi = (x.data.reshape(S * L, D) @ wih.T + bih).reshape(S, L, 3 * H)
    hs = np.zeros((S, L + 1, H), dtype=DTYPE)
    r_all = np.empty((S, L, H))
    z_all = np.empty((S, L, H))
    n_all = np.empty((S, L, H))
    hn_all = np.empty((S, L, H))
    for t in range(L):
        h = hs[:, t]
        gh = h @ whh.T + bhh
        r = _sig(gi[:, t, :H] + gh[:, :H])
        z = _sig(gi[:, t, H:2 * H] + gh[:, H:2 * H])
        n = np.tanh(gi[:, t, 2 * H:] + r * gh[:, 2 * H:])
        hs[:, t + 1] = (1.0 - z) * n + z * h
        r_all[:, t], z_all[:, t], n_all[:, t], hn_all[:, t] = r, z, n, gh[:, 2 * H:]
    out = np.ascontiguousarray(hs[:, 1:])

    def _bw(g):
        d_gi = np.empty((S, L, 3 * H))
        d_gh = np.empty((S, L, 3 * H))
        dh = np.zeros((S, H))
        for t in range(L - 1, -1, -1):
            dh = dh + g[:, t]
            r, z, n, hn, h = r_all[:, t], z_all[:, t], n_all[:, t], hn_all[:, t], hs[:, t]
            dn = dh * (1.0 - z) * (1.0 - n * n)
            dz = dh * (h - n) * z * (1.0 - z)
            dr = dn * hn * r * (1.0 - r)
            d_gi[:, t, :H] = dr
            d_gi[:, t, H:2 * H] = dz
            d_gi[:, t, 2 * H:] = dn
            d_gh[:, t, :H] = dr
            d_gh[:, t, H:2 * H] = dz
            d_gh[:, t, 2 * H:] = dn * r
            dh = dh * z + d_gh[:, t] @ whh
        gi2 = d_gi.reshape(S * L, 3 * H)
        gh2 = d_gh.reshape(S * L, 3 * H)
        gx = (gi2 @ wih).reshape(S, L, D) if x.requires_grad else None
        g_wih = gi2.T @ x.data.reshape(S * L, D)
        g_whh = gh2.T @ hs[:, :L].reshape(S * L, H)
        return gx, g_wih, g_whh, gi2.sum(axis=0), gh2.sum(axis=0)

    return make_node(out, (x, w.w_ih, w.w_hh, w.b_ih, w.b_hh), _bw, "gru")


def bigru_forward(x: Tensor, forward_w: GRUWeights, backward_w: GRUWeights) -> Tensor:
    """Bidirectional GRU: ``(S, L, D) -> (S, L, 2H)`` as [forward, backward]."""
    x = as_tensor(x)
    fwd = gru(x, forward_w)
    rev = slice(None, None, -1)
    bwd = getitem(gru(getitem(x, (slice(None), rev)), backward_w), (slice(None), rev))
    return concat([fwd, bwd], axis=-1)


# ----------------------------------------------------------------- attention
@dataclass
class AttentionWeights:
    q_w: Tensor
    q_b: Tensor
    k_w: Tensor
    k_b: Tensor
    v_w: Tensor
    v_b: Tensor
    o_w: Tensor
    o_b: Tensor


def multi_head_self_attention(x: Tensor, w: AttentionWeights, heads: int, return_attention: bool = False):
    """Scaled dot-product self-attention over ``(S, L, C)`` with ``heads`` heads."""
    x = as_tensor(x)
    S, L, C = x.shape
    if heads < 1 or C % heads:
        raise ConfigurationError(f"channels {C} not divisible by heads {heads}")
    d = C // heads

    def split(t):
        return transpose(reshape(t, (S, L, heads, d)), (0, 2, 1, 3))

    # scaling q rather than the (L, L) scores touches fewer elements
    q = split(linear(x, w.q_w, w.q_b) * (1.0 / np.sqrt(d)))
    k = split(linear(x, w.k_w, w.k_b))
    v = split(linear(x, w.v_w, w.v_b))
    scores = matmul(q, transpose(k, (0, 1, 3, 2)))
    attn = softmax(scores, axis=-1)
    ctx = reshape(transpose(matmul(attn, v), (0, 2, 1, 3)), (S, L, C))
    out = linear(ctx, w.o_w, w.o_b)
    if return_attention:
        return out, attn
    return out
