"""
Architecture hyperparameters and the named presets.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict

from .sharing import SharingConfig, UNSHARED

MASK_ACTIVATIONS = ("sigmoid", "softmax")
NORMALIZATIONS = ("gln", "none")
FAMILIES = ("tasnet", "convtasnet", "custom")
MAX_SOURCES = 3


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of the encoder / TCN separator / decoder network.

    Attributes
    ----------
    N : encoder channels
    L : encoder window in samples
    stride : encoder hop in samples (0 means L // 2)
    B : bottleneck channels
    H : hidden channels inside a block
    Sc : skip channels; 0 disables the skip path
    P : depthwise kernel size (odd, for symmetric padding)
    X : blocks per stack; block x uses dilation 2**x
    R : number of stacks
    C : number of sources
    """

    N: int = 512
    L: int = 16
    stride: int = 0
    B: int = 128
    H: int = 512
    Sc: int = 128
    P: int = 3
    X: int = 8
    R: int = 3
    C: int = 2
    mask_activation: str = "sigmoid"
    normalization: str = "gln"
    family: str = "custom"
    sharing: SharingConfig = field(default_factory=lambda: UNSHARED)

    def __post_init__(self):
        if self.stride == 0:
            object.__setattr__(self, "stride", self.L // 2 if self.L > 1 else 1)

    @property
    def skip_connections(self) -> bool:
        return self.Sc > 0

    @property
    def mask_head_channels(self) -> int:
        return self.Sc if self.skip_connections else self.B

    def dilation(self, x: int) -> int:
        return 2 ** x

    def validate(self) -> "ModelConfig":
        for name in ("N", "L", "stride", "B", "H", "P", "X", "R", "C"):
            if getattr(self, name) < 1:
                raise ValueError(f"ModelConfig.{name} must be positive, got {getattr(self, name)}.")
        if self.Sc < 0:
            raise ValueError(f"ModelConfig.Sc must be >= 0, got {self.Sc}.")
        if self.L % self.stride != 0:
            raise ValueError(f"stride={self.stride} does not divide L={self.L}.")
        if self.P % 2 == 0:
            raise ValueError(f"Depthwise kernel P={self.P} must be odd for symmetric 'same' padding.")
        if self.C > MAX_SOURCES:
            raise ValueError(f"C={self.C} sources exceeds the supported maximum of {MAX_SOURCES}.")
        if self.mask_activation not in MASK_ACTIVATIONS:
            raise ValueError(f"mask_activation must be one of {MASK_ACTIVATIONS}, got '{self.mask_activation}'.")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got '{self.normalization}'.")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got '{self.family}'.")
        return self

    def with_sharing(self, sharing: SharingConfig) -> "ModelConfig":
        return dataclasses.replace(self, sharing=sharing)

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["sharing"] = self.sharing.code
        return d

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ModelConfig":
        d = dict(d)
        d["sharing"] = SharingConfig.parse(d.get("sharing", "nn"))
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known}).validate()


def receptive_field(config: ModelConfig) -> int:
    """Frames seen by one output frame of the block stacks: 1 + (P-1)(2^X - 1)R."""
    return 1 + (config.P - 1) * (2 ** config.X - 1) * config.R


# --- PRESETS ---
_BASE_PRESETS = {
    "tasnet_base": ModelConfig(
        N=512, L=40, B=256, H=512, Sc=0, P=3, X=8, R=4, C=2,
        mask_activation="softmax", family="tasnet",
    ),
    "convtasnet_base": ModelConfig(
        N=512, L=16, B=128, H=512, Sc=128, P=3, X=8, R=3, C=2,
        mask_activation="sigmoid", family="convtasnet",
    ),
    "tiny": ModelConfig(
        N=16, L=4, B=8, H=16, Sc=8, P=3, X=3, R=2, C=2,
        mask_activation="sigmoid", family="custom",
    ),
}

PRESET_NAMES = ("tasnet_base", "convtasnet_base", "simplified1", "simplified2", "tiny")
BASE_PRESET_NAMES = tuple(_BASE_PRESETS)


def preset(name: str, base: str = "convtasnet_base") -> ModelConfig:
    """Named configuration. ``simplified1``/``simplified2`` derive from ``base``
    (one stack / one block per stack)."""
    if name in _BASE_PRESETS:
        return _BASE_PRESETS[name]
    if name in ("simplified1", "simplified2"):
        if base not in _BASE_PRESETS:
            raise ValueError(f"Unknown base preset '{base}' for {name}.")
        parent = _BASE_PRESETS[base]
        return parent.replace(R=1) if name == "simplified1" else parent.replace(X=1)
    raise ValueError(f"Unknown preset '{name}'. Expected one of {PRESET_NAMES}.")


def family_base(config: ModelConfig) -> ModelConfig:
    """Unshared original model a config is compared against."""
    if config.family == "tasnet":
        return _BASE_PRESETS["tasnet_base"]
    if config.family == "convtasnet":
        return _BASE_PRESETS["convtasnet_base"]
    return config.with_sharing(UNSHARED)


def wide_hidden_variant(config: ModelConfig) -> ModelConfig:
    """Stack-shared model with doubled block hidden width (H only)."""
    return config.replace(H=config.H * 2, sharing=SharingConfig.parse("ss"))


def extra_stacks_variant(config: ModelConfig, extra: int = 2) -> ModelConfig:
    """Stack-shared model with more stacks; its size does not change."""
    return config.replace(R=config.R + extra, sharing=SharingConfig.parse("ss"))


def family_label(config: ModelConfig) -> str:
    return "MiTAS" if config.family == "tasnet" else "Conv-MiTAS"


def base_label(config: ModelConfig) -> str:
    if config.family == "tasnet":
        return "TasNet (Base-Model)"
    if config.family == "convtasnet":
        return "Conv-TasNet (Base-Model)"
    return "Base-Model"
