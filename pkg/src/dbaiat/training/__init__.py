"""Loss, optimizer, data pipeline, training loop and checkpoints."""

from .checkpoint import FORMAT_VERSION, MAGIC, Checkpoint, load_checkpoint, save_checkpoint
from .config import TrainingConfig, format_config, load_config, parse_config_text
from .data import (
    SNR_GRID_DB,
    Batch,
    PairedExample,
    SpectralDataset,
    chunk_and_batch,
    ingest_corpus,
    make_synthetic_pair,
    synthetic_dataset,
)
from .loop import TrainResult, build_dataset, total_steps, train
from .loss import MAG_EPS, loss_full
from .optim import AdamState, adam_step, clip_by_global_norm, global_norm

__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "MAG_EPS",
    "SNR_GRID_DB",
    "AdamState",
    "Batch",
    "Checkpoint",
    "PairedExample",
    "SpectralDataset",
    "TrainResult",
    "TrainingConfig",
    "adam_step",
    "build_dataset",
    "chunk_and_batch",
    "clip_by_global_norm",
    "format_config",
    "global_norm",
    "ingest_corpus",
    "load_checkpoint",
    "load_config",
    "loss_full",
    "make_synthetic_pair",
    "parse_config_text",
    "save_checkpoint",
    "synthetic_dataset",
    "total_steps",
    "train",
]
