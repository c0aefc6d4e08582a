"""Objective quality metrics and the per-file report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..dsp import Waveform
from ..errors import InputError

SSNR_FRAME = 320
SSNR_RANGE = (-10.0, 35.0)
SILENCE_ENERGY = 1e-8
SI_SDR_CAP = 60.0


def _samples(x) -> np.ndarray:
    return x.samples if isinstance(x, Waveform) else np.asarray(x, dtype=np.float64)


def _paired(clean, est) -> tuple[np.ndarray, np.ndarray]:
    c, e = _samples(clean), _samples(est)
    if c.shape != e.shape or c.ndim != 1:
        raise InputError(f"clean {c.shape} and estimate {e.shape} must be equal-length 1-D signals")
    return c, e


def ssnr(clean, est, frame: int = SSNR_FRAME) -> float:
    """Segmental SNR over non-overlapping frames, each clamped to [-10, 35] dB.

    Frames whose clean energy is below ``1e-8`` are skipped; a trailing
    partial frame counts as a frame.
    """
    c, e = _paired(clean, est)
    lo, hi = SSNR_RANGE
    values = []
    for start in range(0, c.size, frame):
        cf = c[start:start + frame]
        energy = float(np.dot(cf, cf))
        if energy < SILENCE_ENERGY:
            continue
        diff = cf - e[start:start + frame]
        err = float(np.dot(diff, diff))
        db = hi if err == 0.0 else 10.0 * math.log10(energy / err)
        values.append(min(max(db, lo), hi))
    if not values:
        raise InputError("every frame of the clean signal is silent")
    return math.fsum(values) / len(values)


def si_sdr(clean, est) -> float:
    """Scale-invariant SDR in dB, capped at 60 dB."""
    c, e = _paired(clean, est)
    cc = float(np.dot(c, c))
    if cc == 0.0:
        raise InputError("clean signal is all zeros")
    if not np.any(e):
        raise InputError("estimate is all zeros")
    target = (float(np.dot(e, c)) / cc) * c
    resid = e - target
    num, den = float(np.dot(target, target)), float(np.dot(resid, resid))
    if num == 0.0:
        raise InputError("estimate is orthogonal to the clean signal")
    if den == 0.0:
        return SI_SDR_CAP
    return min(10.0 * math.log10(num / den), SI_SDR_CAP)


def input_snr(clean, noisy) -> float:
    c, x = _paired(clean, noisy)
    noise = x - c
    den = float(np.dot(noise, noise))
    return math.inf if den == 0.0 else 10.0 * math.log10(float(np.dot(c, c)) / den)


@dataclass(frozen=True)
class MetricEntry:
    file: str
    ssnr_db: float
    si_sdr_db: float
    snr_in_db: float

    def line(self) -> str:
        return f"{self.file}\t{self.ssnr_db:.6f}\t{self.si_sdr_db:.6f}\t{self.snr_in_db:.6f}"


@dataclass
class MetricReport:
    entries: list[MetricEntry] = field(default_factory=list)

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: e.file)

    def add(self, entry: MetricEntry) -> None:
        self.entries.append(entry)
        self.entries.sort(key=lambda e: e.file)

    def aggregate(self) -> dict[str, float]:
        n = len(self.entries)
        if n == 0:
            return {"count": 0}

        def avg(attr):
            return math.fsum(getattr(e, attr) for e in self.entries) / n

        return {"count": n, "ssnr_db": avg("ssnr_db"), "si_sdr_db": avg("si_sdr_db"), "snr_in_db": avg("snr_in_db")}

    def lines(self) -> list[str]:
        out = [e.line() for e in self.entries]
        agg = self.aggregate()
        if agg["count"]:
            out.append(f"AGGREGATE\t{agg['ssnr_db']:.6f}\t{agg['si_sdr_db']:.6f}\t{agg['snr_in_db']:.6f}")
        return out

    def summary_table(self) -> str:
        agg = self.aggregate()
        if not agg["count"]:
            return "no files evaluated"
        gain = agg["si_sdr_db"] - agg["snr_in_db"]
        rows = [
            ("files", f"{agg['count']}"),
            ("mean SSNR (dB)", f"{agg['ssnr_db']:.3f}"),
            ("mean SI-SDR (dB)", f"{agg['si_sdr_db']:.3f}"),
            ("mean input SNR (dB)", f"{agg['snr_in_db']:.3f}"),
            ("SI-SDR minus input SNR (dB)", f"{gain:.3f}"),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
