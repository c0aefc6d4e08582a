"""Waveform <-> spectrogram conversion, power compression, mixing and WAV I/O."""

from __future__ import annotations

import wave
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError, InputError

SAMPLE_RATE = 16000


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise InputError(f"waveform must be 1-D, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise InputError("waveform contains non-finite samples")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 320
    win_length: int = 320
    hop: int = 160
    window: str = "hann"
    center: bool = True
    pad_mode: str = "constant"

    def __post_init__(self):
        if self.window != "hann":
            raise ContractError(f"only the Hann window is supported, got {self.window!r}")
        if self.pad_mode not in ("constant", "reflect"):
            raise ContractError(f"pad_mode must be 'constant' or 'reflect', got {self.pad_mode!r}")
        if self.win_length > self.n_fft:
            raise ContractError("win_length cannot exceed n_fft")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def window_array(self) -> np.ndarray:
        # periodic Hann: overlap-adds to a constant at 50 % hop
        n = np.arange(self.win_length)
        w = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.win_length)
        if self.win_length < self.n_fft:
            left = (self.n_fft - self.win_length) // 2
            w = np.pad(w, (left, self.n_fft - self.win_length - left))
        return w

    def n_frames(self, n_samples: int) -> int:
        padded = n_samples + (self.n_fft if self.center else 0)
        return 1 + -(-(padded - self.n_fft) // self.hop)


@dataclass
class ComplexSpectrogram:
    """Real/imaginary parts shaped ``(..., T, F)``.

    ``real``/``imag`` are numpy arrays for signal-processing use; the model
    returns the same container holding :class:`~dbaiat.numerics.Tensor`
    values so that losses stay differentiable.
    """

    real: object
    imag: object
    config: StftConfig = field(default_factory=StftConfig)
    compressed: bool = False

    def __post_init__(self):
        if tuple(self.real.shape) != tuple(self.imag.shape):
            raise ContractError(f"real {self.real.shape} and imag {self.imag.shape} differ")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.real.shape)

    @property
    def ri(self) -> np.ndarray:
        """Stacked ``(..., T, F, 2)`` array of (real, imag)."""
        return np.stack([_array(self.real), _array(self.imag)], axis=-1)

    def magnitude(self) -> np.ndarray:
        r, i = _array(self.real), _array(self.imag)
        return np.sqrt(r * r + i * i)

    def phase(self) -> np.ndarray:
        return np.arctan2(_array(self.imag), _array(self.real))

    @classmethod
    def from_ri(cls, ri, config: StftConfig | None = None, compressed: bool = False):
        ri = np.asarray(ri, dtype=np.float64)
        return cls(ri[..., 0].copy(), ri[..., 1].copy(), config or StftConfig(), compressed)


def _array(x) -> np.ndarray:
    return x.data if hasattr(x, "data") and not isinstance(x, np.ndarray) else np.asarray(x)


def stft(wave_in: Waveform, config: StftConfig | None = None) -> ComplexSpectrogram:
    """One-sided STFT with ``n_fft // 2`` samples of centre padding.

    The tail is zero-padded up to a whole hop so every input sample lies in
    at least one frame.
    """
    config = config or StftConfig()
    x = wave_in.samples
    if x.size == 0:
        raise InputError("cannot transform an empty waveform")
    if config.center:
        half = config.n_fft // 2
        if config.pad_mode == "reflect" and x.size <= half:
            raise InputError(f"waveform of {x.size} samples is too short for reflect padding of {half}")
        x = np.pad(x, half, mode=config.pad_mode)
    if x.size < config.n_fft:
        raise InputError(f"waveform of {x.size} samples is shorter than one frame")
    x = np.pad(x, (0, (-(x.size - config.n_fft)) % config.hop))
    frames = np.lib.stride_tricks.sliding_window_view(x, config.n_fft)[:: config.hop]
    spec = np.fft.rfft(frames * config.window_array(), n=config.n_fft, axis=-1)
    return ComplexSpectrogram(spec.real.copy(), spec.imag.copy(), config, compressed=False)


def istft(spec: ComplexSpectrogram, length: int | None = None) -> Waveform:
    """Overlap-add inverse normalised by the summed squared window."""
    if spec.compressed:
        raise ContractError("istft needs an uncompressed spectrogram; decompress first")
    config = spec.config
    real, imag = _array(spec.real), _array(spec.imag)
    if real.ndim != 2:
        raise ContractError(f"istft expects a single (T, F) spectrogram, got {real.shape}")
    n_frames = real.shape[0]
    window = config.window_array()
    frames = np.fft.irfft(real + 1j * imag, n=config.n_fft, axis=-1) * window
    total = config.n_fft + config.hop * (n_frames - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    w2 = window * window
    for t in range(n_frames):
        start = t * config.hop
        out[start:start + config.n_fft] += frames[t]
        norm[start:start + config.n_fft] += w2
    out /= np.maximum(norm, 1e-10)
    if config.center:
        out = out[config.n_fft // 2: total - config.n_fft // 2]
    if length is not None:
        out = out[:length] if out.size >= length else np.pad(out, (0, length - out.size))
    return Waveform(out)


def compress(spec: ComplexSpectrogram, c: float = 0.5) -> ComplexSpectrogram:
    """Raise the magnitude to the power ``c`` and keep the phase."""
    if spec.compressed:
        raise ContractError("spectrogram is already compressed")
    if not 0.0 < c <= 1.0:
        raise ContractError(f"compression exponent must lie in (0, 1], got {c}")
    return _rescale(spec, c, compressed=True)


def decompress(spec: ComplexSpectrogram, c: float = 0.5) -> ComplexSpectrogram:
    if not spec.compressed:
        raise ContractError("spectrogram is not compressed")
    if not 0.0 < c <= 1.0:
        raise ContractError(f"compression exponent must lie in (0, 1], got {c}")
    return _rescale(spec, 1.0 / c, compressed=False)


def _rescale(spec: ComplexSpectrogram, power: float, compressed: bool) -> ComplexSpectrogram:
    real, imag = _array(spec.real), _array(spec.imag)
    mag = np.sqrt(real * real + imag * imag)
    # |X|^p cos(theta) = X_r |X|^(p-1); zero bins stay zero
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(mag > 0, mag ** (power - 1.0), 0.0)
    return replace(spec, real=real * factor, imag=imag * factor, compressed=compressed)


def power(x: np.ndarray) -> float:
    return float(np.mean(np.square(x)))


def snr_db(clean: np.ndarray, noise: np.ndarray) -> float:
    return 10.0 * np.log10(np.sum(np.square(clean)) / np.sum(np.square(noise)))


def mix_at_snr(clean: Waveform, noise: Waveform, snr: float) -> Waveform:
    """``clean + g * noise`` with ``g`` chosen to hit ``snr`` dB exactly.

    Noise longer than the clean signal is cropped to its first samples.
    """
    if len(noise) < len(clean):
        raise InputError(f"noise has {len(noise)} samples, clean needs {len(clean)}")
    n = noise.samples[: len(clean)]
    p_clean, p_noise = power(clean.samples), power(n)
    if p_clean == 0.0:
        raise InputError("clean signal is silent")
    if p_noise == 0.0:
        raise InputError("noise signal is silent")
    gain = np.sqrt(p_clean / (p_noise * 10.0 ** (snr / 10.0)))
    return Waveform(clean.samples + gain * n, clean.sample_rate)


# ---------------------------------------------------------------- WAV files
def read_wav(path) -> Waveform:
    """Read mono 16-bit PCM at 16 kHz; anything else is a :class:`FormatError`."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as fh:
            channels, width, rate = fh.getnchannels(), fh.getsampwidth(), fh.getframerate()
            if channels != 1:
                raise FormatError(f"{path}: channel count is {channels}, expected 1 (mono)")
            if width != 2:
                raise FormatError(f"{path}: bit depth is {8 * width}, expected 16-bit PCM")
            if rate != SAMPLE_RATE:
                raise FormatError(f"{path}: sample rate is {rate} Hz, expected {SAMPLE_RATE}")
            payload = fh.readframes(fh.getnframes())
    except wave.Error as exc:
        raise FormatError(f"{path}: not a RIFF/WAVE PCM file ({exc})") from exc
    except EOFError as exc:
        raise FormatError(f"{path}: truncated WAV header") from exc
    ints = np.frombuffer(payload, dtype="<i2")
    return Waveform(ints.astype(np.float64) / 32768.0)


def write_wav(path, wave_out: Waveform) -> None:
    if wave_out.sample_rate != SAMPLE_RATE:
        raise FormatError(f"sample rate is {wave_out.sample_rate} Hz, expected {SAMPLE_RATE}")
    ints = np.clip(np.round(wave_out.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(ints.tobytes())
