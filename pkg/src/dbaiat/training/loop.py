from __future__ import annotations

import json
import logging
import time
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, NonFiniteError
from ..model import ModelConfig, ModelWeights, db_aiat_forward, init_weights
from .checkpoint import Checkpoint, save_checkpoint
from .config import TrainingConfig
from .data import SpectralDataset, ingest_corpus, synthetic_dataset
from .loss import loss_full
from .optim import AdamState, adam_step, clip_by_global_norm

log = logging.getLogger(__name__)


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    losses: np.ndarray
    weights: ModelWeights
    seconds: float


def build_dataset(model_config: ModelConfig, config: TrainingConfig) -> SpectralDataset:
    if config.data_source == "corpus":
        examples = ingest_corpus(config.clean_dir, config.noisy_dir)
    else:
        seconds = config.synthetic_seconds or config.chunk_seconds
        examples = synthetic_dataset(config.synthetic_pairs, seconds, config.seed, config.snr_grid_db)
    return SpectralDataset(examples, config.chunk_seconds, config.batch, config.seed, model_config.compression)


def total_steps(config: TrainingConfig, steps_per_epoch: int) -> int:
    n = config.epochs * steps_per_epoch
    return n if config.max_steps is None else min(n, config.max_steps)


def _dump_diagnostics(config: TrainingConfig, info: dict) -> str | None:
    if not config.checkpoint_path:
        return None
    path = Path(config.checkpoint_path).with_suffix(".diagnostics.json")
    path.write_text(json.dumps(info, indent=2, sort_keys=True))
    return str(path)


def train(
    model_config: ModelConfig,
    config: TrainingConfig,
    resume: Checkpoint | None = None,
    dataset: SpectralDataset | None = None,
    on_step: Callable[[int, float], None] | None = None,
) -> TrainResult:
    """Run Adam on ``loss_full`` until ``epochs`` or ``max_steps`` is reached.

    Everything is derived from ``config.seed``, so two calls with the same
    arguments give bit-identical losses and weights. ``resume`` continues a
    run from its saved step with the saved weights and optimizer moments.
    """
    start_time = time.perf_counter()
    if resume is not None:
        if resume.model_config != model_config:
            raise ConfigurationError("resume checkpoint was trained with a different model config")
        weights = resume.model_weights()
        state = AdamState(
            {k: v.copy() for k, v in resume.adam.m.items()},
            {k: v.copy() for k, v in resume.adam.v.items()},
            resume.adam.step,
        )
        losses = list(resume.loss_history)
        step = resume.step
    else:
        weights = init_weights(model_config, config.seed)
        state = AdamState.zeros_like(weights)
        losses, step = [], 0
    data = dataset or build_dataset(model_config, config)
    spe = data.steps_per_epoch
    last = total_steps(config, spe)

    def snapshot() -> Checkpoint:
        return Checkpoint(
            model_config=model_config,
            weights={k: v.data.copy() for k, v in weights.items()},
            adam=AdamState({k: v.copy() for k, v in state.m.items()},
                           {k: v.copy() for k, v in state.v.items()}, state.step),
            training_config=config,
            step=step,
            epoch=step // spe,
            loss_history=np.asarray(losses, dtype=np.float64),
        )

    while step < last:
        batch = data.batch_at(step)
        weights.zero_grad()
        est, _ = db_aiat_forward(batch.noisy, weights, model_config)
        loss = loss_full(est, batch.clean, config.mu)
        value = loss.item()
        if not np.isfinite(value):
            info = {"step": step, "loss": repr(value), "batch_indices": batch.indices.tolist()}
            where = _dump_diagnostics(config, info)
            raise NonFiniteError(
                f"non-finite loss {value} at step {step} (batch {batch.indices.tolist()})"
                + (f"; diagnostics written to {where}" if where else ""),
                where=f"step {step}",
            )
        grads_by_tensor = loss.backward()
        grads = {k: grads_by_tensor[p] for k, p in weights.items() if p in grads_by_tensor}
        if config.clip_norm is not None:
            clip_by_global_norm(grads, config.clip_norm)
        adam_step(weights, grads, state, config.lr)
        losses.append(value)
        step += 1
        if on_step is not None:
            on_step(step, value)
        if config.log_every and step % config.log_every == 0:
            log.info("step %d/%d loss %.6f", step, last, value)
        if config.checkpoint_path and (step % spe == 0 or step == last):
            save_checkpoint(config.checkpoint_path, snapshot())

    return TrainResult(snapshot(), np.asarray(losses, dtype=np.float64), weights, time.perf_counter() - start_time)
