"""The dual-branch attention-in-attention transformer network."""

from .config import BRANCH_MODES, TINY_CONFIG, ModelConfig
from .layers import (
    aha_forward,
    aiat_forward,
    atfat_forward,
    complex_decoder_forward,
    dense_block,
    dense_encoder_forward,
    fuse_encoders,
    improved_transformer,
    mask_decoder_forward,
    subpixel_upsample,
)
from .network import BranchOutputs, db_aiat_forward
from .weights import ModelWeights, ParamScope, count_parameters, identity_weights, init_weights

__all__ = [
    "BRANCH_MODES",
    "TINY_CONFIG",
    "BranchOutputs",
    "ModelConfig",
    "ModelWeights",
    "ParamScope",
    "aha_forward",
    "aiat_forward",
    "atfat_forward",
    "complex_decoder_forward",
    "count_parameters",
    "db_aiat_forward",
    "dense_block",
    "dense_encoder_forward",
    "fuse_encoders",
    "improved_transformer",
    "identity_weights",
    "init_weights",
    "mask_decoder_forward",
    "subpixel_upsample",
]
