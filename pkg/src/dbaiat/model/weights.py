"""Named parameter storage and seeded initialisation."""

from __future__ import annotations

from collections.abc import Iterator, Mapping

import numpy as np

from ..numerics import Tensor
from ..errors import ConfigurationError
from .config import ModelConfig


class ModelWeights(Mapping):
    """Ordered ``name -> Tensor`` map. Names are dotted paths and never change."""

    def __init__(self, params: Mapping[str, Tensor] | None = None):
        self._params: dict[str, Tensor] = dict(params or {})

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def add(self, name: str, value, requires_grad: bool = True) -> Tensor:
        if name in self._params:
            raise KeyError(f"duplicate parameter name {name!r}")
        tensor = Tensor(value, requires_grad=requires_grad)
        self._params[name] = tensor
        return tensor

    def scope(self, prefix: str) -> "ParamScope":
        return ParamScope(self, prefix)

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: v.data for k, v in self._params.items()}

    def requires_grad_(self, flag: bool = True) -> "ModelWeights":
        for p in self._params.values():
            p.requires_grad = flag
        return self

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None

    def copy(self) -> "ModelWeights":
        return ModelWeights(
            {k: Tensor(v.data.copy(), requires_grad=v.requires_grad) for k, v in self._params.items()}
        )


class ParamScope:
    """Prefix view over :class:`ModelWeights` used by the layer functions."""

    __slots__ = ("weights", "prefix")

    def __init__(self, weights: ModelWeights, prefix: str):
        self.weights = weights
        self.prefix = prefix

    def __getitem__(self, name: str) -> Tensor:
        return self.weights[f"{self.prefix}.{name}"]

    def scope(self, sub: str) -> "ParamScope":
        return ParamScope(self.weights, f"{self.prefix}.{sub}")


def count_parameters(weights: Mapping[str, Tensor]) -> int:
    return int(sum(p.size for p in weights.values()))


class _Builder:
    """Creates parameters in a fixed order from one seeded generator."""

    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.weights = ModelWeights()

    def uniform(self, shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return self.rng.uniform(-bound, bound, size=shape)

    def conv(self, name, cout, cin, kt=1, kf=1):
        self.weights.add(f"{name}.weight", self.uniform((cout, cin, kt, kf), cin * kt * kf))
        self.weights.add(f"{name}.bias", np.zeros(cout))

    def linear(self, name, out, inp):
        self.weights.add(f"{name}.weight", self.uniform((out, inp), inp))
        self.weights.add(f"{name}.bias", np.zeros(out))

    def norm(self, name, c):
        self.weights.add(f"{name}.gain", np.ones(c))
        self.weights.add(f"{name}.bias", np.zeros(c))

    def prelu(self, name, c):
        self.weights.add(f"{name}.slope", np.full(c, 0.25))

    def scalar(self, name, value):
        self.weights.add(name, np.array([float(value)]))

    def orthogonal_blocks(self, rows_per_block, blocks, cols):
        mats = []
        for _ in range(blocks):
            q, r = np.linalg.qr(self.rng.standard_normal((rows_per_block, cols)))
            mats.append(q * np.sign(np.diag(r)))
        return np.concatenate(mats, axis=0)

    def gru(self, name, inp, hidden):
        self.weights.add(f"{name}.w_ih", self.uniform((3 * hidden, inp), inp))
        self.weights.add(f"{name}.w_hh", self.orthogonal_blocks(hidden, 3, hidden))
        self.weights.add(f"{name}.b_ih", np.zeros(3 * hidden))
        self.weights.add(f"{name}.b_hh", np.zeros(3 * hidden))


def _conv_block(b: _Builder, name, cout, cin, kt=1, kf=1):
    b.conv(f"{name}.conv", cout, cin, kt, kf)
    b.norm(f"{name}.norm", cout)
    b.prelu(f"{name}.act", cout)


def _dense_block(b: _Builder, name, cfg: ModelConfig):
    C = cfg.channels
    for i in range(cfg.dense_depth):
        _conv_block(b, f"{name}.layer{i}", C, C * (i + 1), 2, 3)


def _encoder(b: _Builder, name, cfg: ModelConfig, cin):
    C = cfg.channels
    _conv_block(b, f"{name}.conv_in", C, cin)
    _dense_block(b, f"{name}.dense", cfg)
    _conv_block(b, f"{name}.conv_out", C, C, 1, 3)


def _transformer(b: _Builder, name, cfg: ModelConfig):
    C, H = cfg.channels, cfg.gru_hidden
    for proj in ("q", "k", "v", "o"):
        b.linear(f"{name}.attn.{proj}", C, C)
    b.norm(f"{name}.norm1", C)
    b.gru(f"{name}.gru.fwd", C, H)
    b.gru(f"{name}.gru.bwd", C, H)
    b.linear(f"{name}.ffn", C, 2 * H)
    b.norm(f"{name}.norm2", C)


def _aiat(b: _Builder, name, cfg: ModelConfig):
    C = cfg.channels
    for n in range(cfg.n_atfat):
        blk = f"{name}.atfat{n}"
        _transformer(b, f"{blk}.time", cfg)
        _transformer(b, f"{blk}.freq", cfg)
        b.scalar(f"{blk}.alpha", 1.0)
        b.scalar(f"{blk}.beta", 1.0)
        b.prelu(f"{blk}.post.act", C)
        b.conv(f"{blk}.post.conv", C, C)
    for n in range(cfg.n_atfat):
        b.conv(f"{name}.aha.level{n}", 1, C)
    b.scalar(f"{name}.aha.gamma", 0.0)


def _upsampler(b: _Builder, name, cfg: ModelConfig):
    C = cfg.channels
    _dense_block(b, f"{name}.dense", cfg)
    b.conv(f"{name}.subpixel.conv", 2 * C, C, 1, 3)
    b.norm(f"{name}.subpixel.norm", C)
    b.prelu(f"{name}.subpixel.act", C)


def _mask_decoder(b: _Builder, name, cfg: ModelConfig):
    C = cfg.channels
    _upsampler(b, name, cfg)
    b.conv(f"{name}.tanh_path", C, C)
    b.conv(f"{name}.sigmoid_path", C, C)
    b.conv(f"{name}.out", 1, C)


def _complex_decoder(b: _Builder, name, cfg: ModelConfig):
    _upsampler(b, name, cfg)
    b.conv(f"{name}.out", 1, cfg.channels)


def init_weights(config: ModelConfig, seed: int = 0) -> ModelWeights:
    """Seeded parameters for ``config``; identical seeds give identical weights."""
    b = _Builder(seed)
    C = config.channels
    if config.uses_mmb:
        _encoder(b, "mmb.encoder", config, 1)
    if config.uses_crb:
        _encoder(b, "crb.encoder", config, 2)
    if config.branches == "dual":
        for branch in ("mmb", "crb"):
            b.conv(f"{branch}.fuse.conv", C, 2 * C)
            b.prelu(f"{branch}.fuse.act", C)
    if config.uses_mmb:
        _aiat(b, "mmb.aiat", config)
        _mask_decoder(b, "mmb.mask_decoder", config)
    if config.uses_crb:
        _aiat(b, "crb.aiat", config)
        _complex_decoder(b, "crb.real_decoder", config)
        _complex_decoder(b, "crb.imag_decoder", config)
    return b.weights


# sigmoid(50) rounds to exactly 1.0 in float64
_SATURATING_LOGIT = 50.0


def identity_weights(config: ModelConfig, seed: int = 0) -> ModelWeights:
    """Weights whose forward pass returns the input spectrogram unchanged.

    The mask output is saturated to one and the residual decoders emit zero;
    all other parameters keep their seeded values.
    """
    if not config.uses_mmb:
        raise ConfigurationError("an identity model needs the masking branch")
    w = init_weights(config, seed)
    w["mmb.mask_decoder.out.weight"].data[...] = 0.0
    w["mmb.mask_decoder.out.bias"].data[...] = _SATURATING_LOGIT
    if config.uses_crb:
        for part in ("real", "imag"):
            w[f"crb.{part}_decoder.out.weight"].data[...] = 0.0
            w[f"crb.{part}_decoder.out.bias"].data[...] = 0.0
    return w
