"""Training configuration and ablation switches."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from shiftcast.errors import UnknownAblation

ABLATIONS = ("no_di", "no_gate", "no_inter")


@dataclass(frozen=True)
class TrainConfig:
    L: int = 96
    H: int = 96
    d: int = 128
    K: int = 2
    tau: float = 0.5
    alpha: float = 0.6
    lr: float = 1e-3
    batch: int = 128
    max_epochs: int = 50
    patience: int = 5
    seed: int = 0
    ablations: tuple[str, ...] = ()
    b: int = 256
    clip_norm: float | None = 5.0
    stride: int = 1
    chunk: int = 32
    eval_sample: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ablations", tuple(sorted(set(self.ablations))))
        unknown = [a for a in self.ablations if a not in ABLATIONS]
        if unknown:
            raise UnknownAblation(f"unknown ablation(s) {unknown}; choose from {list(ABLATIONS)}")
        for name in ("L", "H", "d", "K", "batch", "max_epochs", "patience", "b", "stride", "chunk"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.lr < 0:
            raise ValueError("lr must be nonnegative")
        if self.b % 16:
            raise ValueError("b must be a multiple of 16")

    @property
    def use_di(self) -> bool:
        return "no_di" not in self.ablations

    @property
    def use_gate(self) -> bool:
        return "no_gate" not in self.ablations

    @property
    def use_inter(self) -> bool:
        return "no_inter" not in self.ablations

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.use_inter else 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ablations"] = list(self.ablations)
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        obj = dict(obj)
        obj["ablations"] = tuple(obj.get("ablations", ()))
        return cls(**obj)

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


def apply_ablation(config: TrainConfig, flags=()) -> TrainConfig:
    """Return ``config`` with the extra ablation flags switched on."""
    return config.with_(ablations=tuple(config.ablations) + tuple(flags))

