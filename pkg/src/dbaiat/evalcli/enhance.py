"""Waveform-level enhancement with a trained checkpoint, and directory evaluation."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..dsp import ComplexSpectrogram, StftConfig, Waveform, compress, decompress, istft, read_wav, stft, write_wav
from ..errors import VersionError
from ..model import ModelConfig, ModelWeights, db_aiat_forward, init_weights
from ..numerics import no_grad
from ..training import Checkpoint, ingest_corpus, load_checkpoint
from .metrics import MetricEntry, MetricReport, input_snr, si_sdr, ssnr


def check_compatible(ckpt: Checkpoint) -> None:
    """Raise :class:`VersionError` unless the weights fit the stored model config."""
    expected = {k: v.shape for k, v in init_weights(ckpt.model_config).items()}
    found = {k: v.shape for k, v in ckpt.weights.items()}
    missing = sorted(set(expected) - set(found))
    extra = sorted(set(found) - set(expected))
    wrong = sorted(k for k in set(expected) & set(found) if expected[k] != found[k])
    if missing or extra or wrong:
        detail = []
        if missing:
            detail.append(f"missing {missing[:3]}")
        if extra:
            detail.append(f"unexpected {extra[:3]}")
        if wrong:
            detail.append(f"shape mismatch for {wrong[:3]}")
        raise VersionError("checkpoint weights do not match its model config: " + "; ".join(detail))


class Enhancer:
    def __init__(self, weights: ModelWeights, config: ModelConfig, stft_config: StftConfig | None = None):
        self.weights = weights
        self.config = config
        self.stft_config = stft_config or StftConfig()

    @classmethod
    def from_checkpoint(cls, path) -> "Enhancer":
        ckpt = load_checkpoint(path)
        check_compatible(ckpt)
        return cls(ckpt.model_weights().requires_grad_(False), ckpt.model_config)

    def enhance(self, noisy: Waveform) -> Waveform:
        c = self.config.compression
        spec = compress(stft(noisy, self.stft_config), c)
        with no_grad():
            out, _ = db_aiat_forward(spec, self.weights, self.config)
        est = ComplexSpectrogram(out.real.data, out.imag.data, self.stft_config, compressed=True)
        samples = istft(decompress(est, c), length=len(noisy)).samples
        return Waveform(np.clip(samples, -1.0, 1.0), noisy.sample_rate)


def score(name: str, clean: Waveform, noisy: Waveform, enhanced: Waveform) -> MetricEntry:
    return MetricEntry(name, ssnr(clean, enhanced), si_sdr(clean, enhanced), input_snr(clean, noisy))


def enhance_file(checkpoint_path, in_wav, out_wav, clean_wav=None, enhancer: Enhancer | None = None):
    """Enhance ``in_wav`` into ``out_wav``; with ``clean_wav`` also return metrics."""
    enhancer = enhancer or Enhancer.from_checkpoint(checkpoint_path)
    noisy = read_wav(in_wav)
    enhanced = enhancer.enhance(noisy)
    write_wav(out_wav, enhanced)
    if clean_wav is None:
        return None
    clean = read_wav(clean_wav)
    n = min(len(clean), len(noisy))
    return score(Path(in_wav).name, Waveform(clean.samples[:n]), Waveform(noisy.samples[:n]),
                 Waveform(enhanced.samples[:n]))


def evaluate(checkpoint_path, clean_dir, noisy_dir, out_dir=None) -> MetricReport:
    """Enhance every matched pair and score it; the report is sorted by filename."""
    enhancer = Enhancer.from_checkpoint(checkpoint_path)
    report = MetricReport()
    for pair in ingest_corpus(clean_dir, noisy_dir):
        enhanced = enhancer.enhance(pair.noisy)
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            write_wav(Path(out_dir) / pair.name, enhanced)
        report.add(score(pair.name, pair.clean, pair.noisy, enhanced))
    return report
