"""Binary checkpoint container.

Layout (little-endian)::

    b"DBAT"  u32 version  u32 section_count
    section*:
        u16 name_len  name (utf-8)
        u8 dtype (0 = float64, 1 = utf-8 JSON)  u8 ndim  u64[ndim] shape
        u64 payload_len  payload  u32 crc32(name + header + payload)
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import CorruptionError, VersionError
from ..model import ModelConfig, ModelWeights
from ..numerics import Tensor
from .config import TrainingConfig
from .optim import AdamState

MAGIC = b"DBAT"
FORMAT_VERSION = 1
_FLOAT64, _JSON = 0, 1


@dataclass
class Checkpoint:
    model_config: ModelConfig
    weights: dict[str, np.ndarray]
    adam: AdamState = field(default_factory=AdamState)
    training_config: TrainingConfig | None = None
    step: int = 0
    epoch: int = 0
    loss_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    format_version: int = FORMAT_VERSION

    def model_weights(self) -> ModelWeights:
        return ModelWeights({k: Tensor(v.copy(), requires_grad=True) for k, v in self.weights.items()})


def _section(name: str, dtype: int, shape: tuple[int, ...], payload: bytes) -> bytes:
    key = name.encode("utf-8")
    head = struct.pack("<H", len(key)) + key
    head += struct.pack("<BB", dtype, len(shape)) + struct.pack(f"<{len(shape)}Q", *shape)
    head += struct.pack("<Q", len(payload))
    crc = zlib.crc32(head + payload)
    return head + payload + struct.pack("<I", crc)


def _array_section(name: str, arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return _section(name, _FLOAT64, arr.shape, arr.tobytes())


def _json_section(name: str, obj) -> bytes:
    return _section(name, _JSON, (), json.dumps(obj, sort_keys=True).encode("utf-8"))


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    meta = {
        "model_config": ckpt.model_config.to_dict(),
        "training_config": None if ckpt.training_config is None else ckpt.training_config.to_dict(),
        "step": ckpt.step,
        "epoch": ckpt.epoch,
        "adam_step": ckpt.adam.step,
    }
    sections = [_json_section("meta", meta)]
    sections += [_array_section(f"weights/{k}", v) for k, v in ckpt.weights.items()]
    sections += [_array_section(f"adam.m/{k}", v) for k, v in ckpt.adam.m.items()]
    sections += [_array_section(f"adam.v/{k}", v) for k, v in ckpt.adam.v.items()]
    sections.append(_array_section("history/loss", np.asarray(ckpt.loss_history, dtype=np.float64)))
    blob = MAGIC + struct.pack("<II", ckpt.format_version, len(sections)) + b"".join(sections)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int, section: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise CorruptionError(f"checkpoint truncated inside section {section!r}", section=section)
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, section: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), section))


def _read_sections(blob: bytes) -> dict[str, object]:
    r = _Reader(blob)
    if r.take(4, "header") != MAGIC:
        raise CorruptionError("not a checkpoint: bad magic bytes", section="header")
    version, count = r.unpack("<II", "header")
    if version != FORMAT_VERSION:
        raise VersionError(f"checkpoint format version {version}, this build reads {FORMAT_VERSION}")
    out: dict[str, object] = {}
    for i in range(count):
        start = r.pos
        (name_len,) = r.unpack("<H", f"#{i}")
        name = r.take(name_len, f"#{i}").decode("utf-8", errors="replace")
        dtype, ndim = r.unpack("<BB", name)
        shape = r.unpack(f"<{ndim}Q", name)
        (length,) = r.unpack("<Q", name)
        payload = r.take(length, name)
        body = blob[start:r.pos]
        (crc,) = r.unpack("<I", name)
        if zlib.crc32(body) != crc:
            raise CorruptionError(f"checksum mismatch in section {name!r}", section=name)
        if dtype == _FLOAT64:
            if length != 8 * int(np.prod(shape, dtype=np.int64)):
                raise CorruptionError(f"section {name!r} payload does not match shape {shape}", section=name)
            out[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).astype(np.float64)
        elif dtype == _JSON:
            out[name] = json.loads(payload.decode("utf-8"))
        else:
            raise CorruptionError(f"unknown dtype code {dtype} in section {name!r}", section=name)
    if r.pos != len(blob):
        raise CorruptionError("trailing bytes after the last section", section="trailer")
    if "meta" not in out:
        raise CorruptionError("checkpoint has no meta section", section="meta")
    return out


def load_checkpoint(path) -> Checkpoint:
    sections = _read_sections(Path(path).read_bytes())
    meta = sections.pop("meta")
    try:
        model_config = ModelConfig.from_dict(meta["model_config"])
        training = meta.get("training_config")
        training_config = None if training is None else TrainingConfig.from_dict(training)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptionError(f"invalid meta section: {exc}", section="meta") from exc
    groups: dict[str, dict[str, np.ndarray]] = {"weights": {}, "adam.m": {}, "adam.v": {}}
    history = np.zeros(0)
    for name, arr in sections.items():
        if name == "history/loss":
            history = arr
            continue
        group, _, key = name.partition("/")
        if group not in groups or not key:
            raise CorruptionError(f"unexpected section {name!r}", section=name)
        groups[group][key] = arr
    adam = AdamState(groups["adam.m"], groups["adam.v"], int(meta.get("adam_step", 0)))
    return Checkpoint(
        model_config=model_config,
        weights=groups["weights"],
        adam=adam,
        training_config=training_config,
        step=int(meta.get("step", 0)),
        epoch=int(meta.get("epoch", 0)),
        loss_history=history,
    )
