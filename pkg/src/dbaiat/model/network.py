"""Dual-branch assembly: magnitude masking branch plus complex refining branch."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dsp import ComplexSpectrogram
from ..errors import ContractError, DimensionError
from ..numerics import Tensor, concat, reshape
from .config import ModelConfig
from .layers import (
    aiat_forward,
    complex_decoder_forward,
    dense_encoder_forward,
    fuse_encoders,
    mask_decoder_forward,
)
from .weights import ModelWeights


@dataclass
class BranchOutputs:
    """Intermediate spectra, each ``(B, T, F, 1)``; ``None`` for an absent branch."""

    merged_real: Tensor
    merged_imag: Tensor
    mask: Tensor | None = None
    coarse_real: Tensor | None = None
    coarse_imag: Tensor | None = None
    crb_real: Tensor | None = None
    crb_imag: Tensor | None = None
    aha_weights: dict[str, np.ndarray] = field(default_factory=dict)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def db_aiat_forward(
    noisy: ComplexSpectrogram, weights: ModelWeights, config: ModelConfig
) -> tuple[ComplexSpectrogram, BranchOutputs]:
    """Enhance a compressed spectrogram shaped ``(T, F)`` or ``(B, T, F)``.

    The returned spectrogram holds :class:`Tensor` fields of the same shape
    as the input so that a loss can be backpropagated through it.
    """
    if not noisy.compressed:
        raise ContractError("db_aiat_forward expects a power-compressed spectrogram")
    real, imag = _as_tensor(noisy.real), _as_tensor(noisy.imag)
    in_shape = real.shape
    if len(in_shape) == 2:
        real, imag = reshape(real, (1, *in_shape)), reshape(imag, (1, *in_shape))
    if real.ndim != 3 or real.shape[-1] != config.freq_bins or real.shape[1] < 1:
        raise DimensionError(f"expected (B, T, {config.freq_bins}) spectrogram, got {in_shape}")
    B, T, F = real.shape
    xr = reshape(real, (B, T, F, 1))
    xi = reshape(imag, (B, T, F, 1))
    # magnitude enters only as an input feature, so it carries no gradient
    mag = Tensor(np.sqrt(xr.data * xr.data + xi.data * xi.data))

    mmb_enc = dense_encoder_forward(mag, weights.scope("mmb.encoder"), config) if config.uses_mmb else None
    crb_enc = (
        dense_encoder_forward(concat([xr, xi], axis=-1), weights.scope("crb.encoder"), config)
        if config.uses_crb
        else None
    )
    if config.branches == "dual":
        mmb_in = fuse_encoders(mmb_enc, crb_enc, weights.scope("mmb.fuse"))
        crb_in = fuse_encoders(mmb_enc, crb_enc, weights.scope("crb.fuse"))
    else:
        mmb_in, crb_in = mmb_enc, crb_enc

    out = {}
    aha = {}
    if config.uses_mmb:
        trunk, w = aiat_forward(mmb_in, weights.scope("mmb.aiat"), config)
        aha["mmb"] = w.data.copy()
        mask = mask_decoder_forward(trunk, weights.scope("mmb.mask_decoder"), config)
        # mask * |X| with the noisy phase is mask * X_r, mask * X_i
        out.update(mask=mask, coarse_real=mask * xr, coarse_imag=mask * xi)
    if config.uses_crb:
        trunk, w = aiat_forward(crb_in, weights.scope("crb.aiat"), config)
        aha["crb"] = w.data.copy()
        out["crb_real"] = complex_decoder_forward(trunk, weights.scope("crb.real_decoder"), config)
        out["crb_imag"] = complex_decoder_forward(trunk, weights.scope("crb.imag_decoder"), config)

    if config.branches == "dual":
        merged_r = out["coarse_real"] + out["crb_real"]
        merged_i = out["coarse_imag"] + out["crb_imag"]
    elif config.branches == "mmb_only":
        merged_r, merged_i = out["coarse_real"], out["coarse_imag"]
    else:
        merged_r, merged_i = out["crb_real"], out["crb_imag"]

    branch = BranchOutputs(merged_real=merged_r, merged_imag=merged_i, aha_weights=aha, **out)
    enhanced = ComplexSpectrogram(
        reshape(merged_r, in_shape), reshape(merged_i, in_shape), noisy.config, compressed=True
    )
    return enhanced, branch
