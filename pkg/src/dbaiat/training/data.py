"""Paired clean/noisy examples and the batches fed to the network."""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from ..dsp import SAMPLE_RATE, ComplexSpectrogram, StftConfig, Waveform, compress, mix_at_snr, read_wav, snr_db, stft
from ..errors import DbAiatError, InputError

log = logging.getLogger(__name__)

SNR_GRID_DB = (0.0, 5.0, 10.0, 15.0)


@dataclass
class PairedExample:
    clean: Waveform
    noisy: Waveform
    snr_db: float
    provenance: str = "synthetic"
    name: str = ""

    def __post_init__(self):
        if len(self.clean) != len(self.noisy):
            raise InputError(f"clean has {len(self.clean)} samples, noisy has {len(self.noisy)}")
        if self.clean.sample_rate != SAMPLE_RATE or self.noisy.sample_rate != SAMPLE_RATE:
            raise InputError("paired examples must both be 16 kHz")


def _tone_mixture(rng: np.random.Generator, n: int) -> np.ndarray:
    """2 to 4 harmonic tones in 100-3400 Hz, each under a smooth random envelope."""
    t = np.arange(n) / SAMPLE_RATE
    out = np.zeros(n)
    for _ in range(rng.integers(2, 5)):
        f0 = rng.uniform(100.0, 1000.0)
        n_harm = int(min(rng.integers(1, 4), 3400.0 // f0))
        tone = np.zeros(n)
        for h in range(1, n_harm + 1):
            tone += np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi)) / h
        # slow amplitude modulation plus an attack/decay window
        rate = rng.uniform(0.5, 4.0)
        env = 0.6 + 0.4 * np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi))
        dur = n / SAMPLE_RATE
        onset, offset = rng.uniform(0.0, 0.3) * dur, rng.uniform(0.7, 1.0) * dur
        ramp = 0.02
        gate = np.clip((t - onset) / ramp, 0, 1) * np.clip((offset - t) / ramp, 0, 1)
        out += rng.uniform(0.3, 1.0) * env * gate * tone
    return out


def _coloured_noise(rng: np.random.Generator, n: int) -> np.ndarray:
    white = rng.standard_normal(n)
    pole = rng.uniform(-0.9, 0.9)
    return lfilter([1.0], [1.0, -pole], white)


def make_synthetic_pair(seed: int, duration_s: float, snr: float | None = None,
                        snr_grid: Sequence[float] = SNR_GRID_DB) -> PairedExample:
    """Deterministic tone-plus-noise pair. ``snr=None`` draws from ``snr_grid``."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * SAMPLE_RATE))
    if n < 1:
        raise InputError(f"duration {duration_s} s gives no samples")
    if snr is None:
        snr = float(snr_grid[rng.integers(len(snr_grid))])
    clean = _tone_mixture(rng, n)
    noise = _coloured_noise(rng, n)
    noisy = mix_at_snr(Waveform(clean), Waveform(noise), snr).samples
    peak = max(np.max(np.abs(noisy)), np.max(np.abs(clean)))
    if peak > 1.0:
        scale = 0.99 / peak
        clean, noisy = clean * scale, noisy * scale
    return PairedExample(Waveform(clean), Waveform(noisy), float(snr), "synthetic", f"synthetic-{seed}")


def synthetic_dataset(n_pairs: int, duration_s: float, seed: int,
                      snr_grid: Sequence[float] = SNR_GRID_DB) -> list[PairedExample]:
    # per-example seeds derived from the dataset seed keep pairs independent of n_pairs
    seeds = np.random.SeedSequence(seed).generate_state(n_pairs)
    return [make_synthetic_pair(int(s), duration_s, snr_grid=snr_grid) for s in seeds]


def ingest_corpus(clean_dir, noisy_dir) -> list[PairedExample]:
    """Pair WAV files present in both directories, sorted by filename."""
    clean_dir, noisy_dir = Path(clean_dir), Path(noisy_dir)
    clean_names = {p.name for p in clean_dir.glob("*.wav")}
    noisy_names = {p.name for p in noisy_dir.glob("*.wav")}
    for name in sorted(clean_names ^ noisy_names):
        side = "clean" if name in clean_names else "noisy"
        log.warning("skipping %s: present only in the %s directory", name, side)
    common = sorted(clean_names & noisy_names)
    if not common:
        raise InputError(f"no matching WAV filenames in {clean_dir} and {noisy_dir}")
    pairs = []
    for name in common:
        try:
            clean = read_wav(clean_dir / name)
            noisy = read_wav(noisy_dir / name)
        except DbAiatError as exc:
            log.warning("skipping %s: %s", name, exc)
            continue
        n = min(len(clean), len(noisy))
        if n == 0:
            log.warning("skipping %s: empty file", name)
            continue
        if len(clean) != len(noisy):
            log.info("truncating %s to %d samples", name, n)
        c, x = clean.samples[:n], noisy.samples[:n]
        noise = x - c
        snr = snr_db(c, noise) if np.any(noise) and np.any(c) else float("inf")
        pairs.append(PairedExample(Waveform(c), Waveform(x), snr, "corpus", name))
    if not pairs:
        raise InputError("every candidate pair was skipped")
    return pairs


@dataclass
class Batch:
    noisy: ComplexSpectrogram
    clean: ComplexSpectrogram
    indices: np.ndarray


def _fit_length(x: np.ndarray, n: int) -> np.ndarray:
    return x[:n] if x.size >= n else np.pad(x, (0, n - x.size))


class SpectralDataset:
    """Compressed spectrograms of fixed-length chunks, batched by a seeded order.

    The order of epoch ``e`` is a permutation drawn from ``(seed, e)`` so
    any step can be reproduced without replaying earlier ones.
    """

    def __init__(self, examples: Sequence[PairedExample], chunk_seconds: float, batch: int, seed: int,
                 compression: float = 0.5, stft_config: StftConfig | None = None):
        if not examples:
            raise InputError("no training examples")
        self.batch = batch
        self.seed = seed
        self.stft_config = stft_config or StftConfig()
        n = int(round(chunk_seconds * SAMPLE_RATE))
        noisy, clean = [], []
        for ex in examples:
            noisy.append(compress(stft(Waveform(_fit_length(ex.noisy.samples, n)), self.stft_config), compression))
            clean.append(compress(stft(Waveform(_fit_length(ex.clean.samples, n)), self.stft_config), compression))
        self.noisy_ri = np.stack([s.ri for s in noisy])
        self.clean_ri = np.stack([s.ri for s in clean])

    def __len__(self) -> int:
        return self.noisy_ri.shape[0]

    @property
    def steps_per_epoch(self) -> int:
        return -(-len(self) // self.batch)

    def order(self, epoch: int) -> np.ndarray:
        return np.random.default_rng([self.seed, epoch]).permutation(len(self))

    def batch_at(self, step: int) -> Batch:
        epoch, k = divmod(step, self.steps_per_epoch)
        idx = self.order(epoch)[k * self.batch:(k + 1) * self.batch]
        return self._gather(idx)

    def _gather(self, idx: np.ndarray) -> Batch:
        cfg = self.stft_config
        return Batch(
            ComplexSpectrogram.from_ri(self.noisy_ri[idx], cfg, compressed=True),
            ComplexSpectrogram.from_ri(self.clean_ri[idx], cfg, compressed=True),
            idx,
        )

    def epoch(self, epoch: int) -> Iterator[Batch]:
        for k in range(self.steps_per_epoch):
            yield self.batch_at(epoch * self.steps_per_epoch + k)


def chunk_and_batch(examples: Sequence[PairedExample], chunk_seconds: float, batch: int, seed: int,
                    epochs: int = 1, compression: float = 0.5) -> Iterator[Batch]:
    """Yield ``epochs`` passes of shuffled batches of compressed spectrogram pairs."""
    data = SpectralDataset(examples, chunk_seconds, batch, seed, compression)
    for e in range(epochs):
        yield from data.epoch(e)
