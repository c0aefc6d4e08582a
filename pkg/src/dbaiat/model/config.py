from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigurationError

BRANCH_MODES = ("dual", "mmb_only", "crb_only")


@dataclass(frozen=True)
class ModelConfig:
    """Architectural hyperparameters. Defaults give the full-size network."""

    n_atfat: int = 4
    channels: int = 64
    freq_bins: int = 161
    heads: int = 4
    gru_hidden: int = 48
    dense_depth: int = 4
    dense_dilations: tuple[int, ...] = (1, 2, 4, 8)
    branches: str = "dual"
    compression: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "dense_dilations", tuple(int(d) for d in self.dense_dilations))
        if self.branches not in BRANCH_MODES:
            raise ConfigurationError(f"branches must be one of {BRANCH_MODES}, got {self.branches!r}")
        if self.channels < 1 or self.heads < 1 or self.channels % self.heads:
            raise ConfigurationError(f"channels {self.channels} must be divisible by heads {self.heads}")
        if self.n_atfat < 1:
            raise ConfigurationError("n_atfat must be >= 1")
        if self.gru_hidden < 1:
            raise ConfigurationError("gru_hidden must be >= 1")
        if len(self.dense_dilations) != self.dense_depth or min(self.dense_dilations, default=1) < 1:
            raise ConfigurationError(
                f"dense_dilations {self.dense_dilations} must hold dense_depth={self.dense_depth} positive entries"
            )
        if self.freq_bins < 3:
            raise ConfigurationError("freq_bins must be >= 3 for the (1, 3) stride-2 encoder convolution")
        if not 0.0 < self.compression <= 1.0:
            raise ConfigurationError(f"compression must lie in (0, 1], got {self.compression}")

    @property
    def halved_bins(self) -> int:
        return (self.freq_bins - 3) // 2 + 1

    @property
    def uses_mmb(self) -> bool:
        return self.branches in ("dual", "mmb_only")

    @property
    def uses_crb(self) -> bool:
        return self.branches in ("dual", "crb_only")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dense_dilations"] = list(self.dense_dilations)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**d)


TINY_CONFIG = ModelConfig(
    n_atfat=2, channels=8, freq_bins=21, heads=2, gru_hidden=4, dense_depth=4, dense_dilations=(1, 2, 4, 8)
)
