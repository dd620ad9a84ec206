"""
Parameter registry: owns every model tensor under its canonical key and
produces the size / compression audit.
"""

import zlib
from collections import Counter, OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from numeric import Tensor
from .config import ModelConfig
from .sharing import ParamKey, SharingConfig, block_key, canonicalize

PRELU_INIT = 0.25
STACK_SHARED = SharingConfig.parse("ss")


@dataclass(frozen=True)
class ParamSpec:
    """One parameter site of the network before canonicalization."""

    key: ParamKey
    shape: Tuple[int, ...]
    init: str  # 'uniform' | 'zeros' | 'ones' | 'prelu'
    fan_in: int = 1


def parameter_specs(config: ModelConfig) -> List[ParamSpec]:
    """Enumerate every parameter site in construction order."""
    N, L, B, H, Sc, P, C = config.N, config.L, config.B, config.H, config.Sc, config.P, config.C
    use_norm = config.normalization == "gln"
    specs: List[ParamSpec] = []

    def add(key, shape, init, fan_in=1):
        specs.append(ParamSpec(key, tuple(shape), init, fan_in))

    # 1. encoder / bottleneck (input norm + 1x1 N->B)
    add(ParamKey("encoder", "weight"), (N, 1, L), "uniform", L)
    if use_norm:
        add(ParamKey("bottleneck", "norm_gain"), (N,), "ones")
        add(ParamKey("bottleneck", "norm_bias"), (N,), "zeros")
    add(ParamKey("bottleneck", "weight"), (B, N, 1), "uniform", N)
    add(ParamKey("bottleneck", "bias"), (B,), "zeros")

    # 2. blocks: pointwise component, then separable component
    for r in range(config.R):
        for x in range(config.X):
            def pw(role, shape, init, fan_in=1):
                add(block_key("pointwise", r, x, role), shape, init, fan_in)

            def sep(role, shape, init, fan_in=1):
                add(block_key("separable", r, x, role), shape, init, fan_in)

            pw("input_weight", (H, B, 1), "uniform", B)
            pw("input_bias", (H,), "zeros")
            pw("prelu_slope", (1,), "prelu")
            if use_norm:
                pw("norm_gain", (H,), "ones")
                pw("norm_bias", (H,), "zeros")
            if config.skip_connections:
                pw("skip_weight", (Sc, H, 1), "uniform", H)
                pw("skip_bias", (Sc,), "zeros")

            sep("depthwise_weight", (H, 1, P), "uniform", P)
            sep("depthwise_bias", (H,), "zeros")
            sep("prelu_slope", (1,), "prelu")
            if use_norm:
                sep("norm_gain", (H,), "ones")
                sep("norm_bias", (H,), "zeros")
            sep("residual_weight", (B, H, 1), "uniform", H)
            sep("residual_bias", (B,), "zeros")

    # 3. mask head (PReLU + 1x1 -> C*N) and decoder
    add(ParamKey("mask_head", "prelu_slope"), (1,), "prelu")
    add(ParamKey("mask_head", "weight"), (C * N, config.mask_head_channels, 1), "uniform", config.mask_head_channels)
    add(ParamKey("mask_head", "bias"), (C * N,), "zeros")
    add(ParamKey("decoder", "weight"), (N, 1, L), "uniform", N)
    return specs


def _initial_value(spec: ParamSpec, seed: int, dtype) -> np.ndarray:
    if spec.init == "zeros":
        return np.zeros(spec.shape, dtype=dtype)
    if spec.init == "ones":
        return np.ones(spec.shape, dtype=dtype)
    if spec.init == "prelu":
        return np.full(spec.shape, PRELU_INIT, dtype=dtype)
    # per-site stream: a site draws the same values whatever the sharing scheme
    rng = np.random.default_rng([seed, zlib.crc32(str(spec.key).encode("utf-8"))])
    bound = 1.0 / np.sqrt(spec.fan_in)
    return rng.uniform(-bound, bound, size=spec.shape).astype(dtype)


class ParameterStore:
    """Map canonical key -> Tensor, plus how many sites reference each key."""

    def __init__(self, sharing: SharingConfig, dtype=np.float32):
        self.sharing = sharing
        self.dtype = np.dtype(dtype)
        self.tensors: "OrderedDict[ParamKey, Tensor]" = OrderedDict()
        self.site_refs: Counter = Counter()

    def canonical(self, key: ParamKey) -> ParamKey:
        return canonicalize(key, self.sharing)

    def register(self, spec: ParamSpec, seed: int = 0) -> Tensor:
        """Create (first site) or reuse (later sites) the tensor behind ``spec.key``."""
        ckey = self.canonical(spec.key)
        tensor = self.tensors.get(ckey)
        if tensor is None:
            tensor = Tensor(_initial_value(spec, seed, self.dtype), requires_grad=True, dtype=self.dtype)
            self.tensors[ckey] = tensor
        elif tensor.shape != spec.shape:
            raise ValueError(f"Site {spec.key} expects shape {spec.shape} but {ckey} holds {tensor.shape}.")
        self.site_refs[ckey] += 1
        return tensor

    def get(self, key: ParamKey) -> Tensor:
        ckey = self.canonical(key)
        if ckey not in self.tensors:
            raise KeyError(f"Missing parameter {ckey} (site {key}).")
        return self.tensors[ckey]

    def set(self, key: ParamKey, values: np.ndarray):
        """Write through any site; every tied site observes the new values."""
        tensor = self.get(key)
        values = np.asarray(values, dtype=self.dtype)
        if values.shape != tensor.shape:
            raise ValueError(f"Cannot write shape {values.shape} into {self.canonical(key)} of shape {tensor.shape}.")
        tensor.data[...] = values

    def __contains__(self, key: ParamKey) -> bool:
        return self.canonical(key) in self.tensors

    def __len__(self):
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def parameters(self) -> List[Tensor]:
        return list(self.tensors.values())

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def zero_grad(self):
        for t in self.tensors.values():
            t.zero_grad()

    def gradients(self) -> Dict[ParamKey, np.ndarray]:
        return {k: (t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in self.tensors.items()}

    def clone(self, dtype=None) -> "ParameterStore":
        other = ParameterStore(self.sharing, dtype or self.dtype)
        for k, t in self.tensors.items():
            other.tensors[k] = Tensor(t.data.astype(other.dtype, copy=True), requires_grad=True, dtype=other.dtype)
        other.site_refs = Counter(self.site_refs)
        return other


def build_store(config: ModelConfig, seed: int = 0, dtype=np.float32) -> ParameterStore:
    store = ParameterStore(config.sharing, dtype)
    for spec in parameter_specs(config):
        store.register(spec, seed)
    return store


def unshare(store: ParameterStore, config: ModelConfig) -> ParameterStore:
    """Copied-weight unshared store: every site gets its own copy of its canonical tensor."""
    unshared = ParameterStore(SharingConfig(), store.dtype)
    for spec in parameter_specs(config):
        source = store.get(spec.key)
        unshared.tensors[spec.key] = Tensor(source.data.copy(), requires_grad=True, dtype=store.dtype)
        unshared.site_refs[spec.key] += 1
    return unshared


def fold_gradients(grads: Dict[ParamKey, np.ndarray], sharing: SharingConfig) -> Dict[ParamKey, np.ndarray]:
    """Sum per-site gradients of an unshared model onto the keys of ``sharing``."""
    folded: Dict[ParamKey, np.ndarray] = {}
    for key, g in grads.items():
        ckey = canonicalize(key, sharing)
        folded[ckey] = folded[ckey] + g if ckey in folded else g.copy()
    return folded


# =================================================================
#  AUDIT
# =================================================================
MODULE_ORDER = ("encoder", "bottleneck", "blocks.pointwise", "blocks.separable", "mask_head", "decoder")


def _module_of(key: ParamKey) -> str:
    return f"blocks.{key.component}" if key.is_block else key.site


@dataclass
class ParamReport:
    """Per-module parameter breakdown and compression against a baseline."""

    rows: List[Tuple[str, int]]
    total: int
    baseline_total: int
    label: str = ""
    scheme: str = "nn"
    stack_shared_total: int = 0  # same network, every block tied across stacks
    one_stack_total: int = 0  # same network cut to one unshared stack

    @property
    def compression_ratio(self) -> float:
        """Percentage of the baseline size."""
        return 100.0 * self.total / self.baseline_total

    @property
    def stack_identity_holds(self) -> bool:
        """Stack-shared size equals the one-stack unshared size."""
        return self.stack_shared_total == self.one_stack_total

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{
                "model_label": self.label,
                "scheme": self.scheme,
                "size_params": self.total,
                "compression_pct": round(self.compression_ratio, 4),
            }]
        )

    def to_text(self) -> str:
        width = max(len(name) for name, _ in self.rows + [("TOTAL", 0)])
        lines = [f"{self.label} [{self.scheme}]".strip()]
        lines.append("-" * (width + 16))
        for name, count in self.rows:
            lines.append(f"{name:<{width}}  {count:>12,d}")
        lines.append("-" * (width + 16))
        lines.append(f"{'TOTAL':<{width}}  {self.total:>12,d}")
        lines.append(f"{'BASELINE':<{width}}  {self.baseline_total:>12,d}")
        lines.append(f"{'C.P.':<{width}}  {self.compression_ratio:>11.2f}%")
        if self.one_stack_total:
            relation = "==" if self.stack_identity_holds else "!="
            lines.append(f"{'SS vs 1-STACK':<{width}}  {self.stack_shared_total:,d} {relation} {self.one_stack_total:,d}")
        return "\n".join(lines)


def count_parameters(config: ModelConfig) -> Tuple[int, Dict[str, int]]:
    """Count every scalar of every distinct canonical tensor exactly once."""
    seen = {}
    for spec in parameter_specs(config):
        ckey = canonicalize(spec.key, config.sharing)
        seen.setdefault(ckey, spec)
    per_module = {name: 0 for name in MODULE_ORDER}
    for ckey, spec in seen.items():
        per_module[_module_of(ckey)] += int(np.prod(spec.shape))
    return sum(per_module.values()), per_module


def audit(config: ModelConfig, baseline: Optional[ModelConfig] = None, label: str = "") -> ParamReport:
    """Size report of ``config``; the baseline defaults to the same config unshared."""
    config.validate()
    total, per_module = count_parameters(config)
    base_cfg = baseline if baseline is not None else config.with_sharing(SharingConfig())
    baseline_total, _ = count_parameters(base_cfg)
    return ParamReport(
        rows=[(name, per_module[name]) for name in MODULE_ORDER],
        total=total,
        baseline_total=baseline_total,
        label=label,
        scheme=config.sharing.code,
        stack_shared_total=count_parameters(config.with_sharing(STACK_SHARED))[0],
        one_stack_total=count_parameters(config.replace(R=1, sharing=SharingConfig()))[0],
    )


def reports_to_frame(reports: Iterable[ParamReport]) -> pd.DataFrame:
    return pd.concat([r.to_frame() for r in reports], ignore_index=True)
