"""
Encoder -> masking TCN separator -> decoder network, reading every weight
through the parameter store so tied sites share one tensor.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from numeric import Tensor
from numeric import functional as F
from .config import ModelConfig
from .parameter_store import ParameterStore, build_store, parameter_specs
from .sharing import ParamKey, block_key


@dataclass
class SeparatorOutput:
    sources: Tensor  # [C, T']
    masks: Tensor  # [C, N, frames]


class SeparationModel:
    """Builds the network of a ``ModelConfig`` on top of a ``ParameterStore``.

    Parameters
    ----------
    config : ModelConfig
        Architecture and sharing scheme.
    store : ParameterStore, optional
        Existing parameters (e.g. from a checkpoint). A fresh seeded store is
        built when omitted.
    seed : int
        Initialization seed for a fresh store.
    dtype : numpy dtype
        float32 for training, float64 for verification.

    Every site is resolved at construction; a missing canonical parameter
    raises ``KeyError`` here, never during a forward pass.
    """

    def __init__(self, config: ModelConfig, store: Optional[ParameterStore] = None, *, seed: int = 0, dtype=np.float32):
        self.config = config.validate()
        if store is None:
            store = build_store(config, seed=seed, dtype=dtype)
        elif store.sharing != config.sharing:
            raise ValueError(f"Store uses sharing '{store.sharing}' but the config asks for '{config.sharing}'.")
        self.store = store
        self.dtype = store.dtype
        self._sites: Dict[ParamKey, Tensor] = {}
        self._bind()

    # --- construction ---
    def _bind(self):
        missing = []
        for spec in parameter_specs(self.config):
            if spec.key not in self.store:
                missing.append(str(self.store.canonical(spec.key)))
                continue
            tensor = self.store.get(spec.key)
            if tensor.shape != spec.shape:
                raise ValueError(f"Parameter {spec.key} has shape {tensor.shape}, expected {spec.shape}.")
            self._sites[spec.key] = tensor
        if missing:
            raise KeyError(f"Store lacks {len(missing)} canonical parameter(s): {', '.join(sorted(set(missing)))}")

    def _p(self, site: str, role: str) -> Tensor:
        return self._sites[ParamKey(site, role)]

    def _b(self, component: str, r: int, x: int, role: str) -> Tensor:
        return self._sites[block_key(component, r, x, role)]

    def parameters(self) -> List[Tensor]:
        return self.store.parameters()

    @property
    def use_norm(self) -> bool:
        return self.config.normalization == "gln"

    # --- geometry ---
    def num_frames(self, length: int) -> int:
        cfg = self.config
        return (length - cfg.L) // cfg.stride + 1

    def analyzed_length(self, length: int) -> int:
        """Samples covered by whole hops; the length of every separated source."""
        return (self.num_frames(length) - 1) * self.config.stride + self.config.L

    def _as_input(self, mixture) -> Tensor:
        if isinstance(mixture, Tensor):
            return mixture if mixture.dtype == self.dtype else Tensor(mixture.data, dtype=self.dtype)
        return Tensor(np.asarray(mixture), dtype=self.dtype)

    # =================================================================
    #  ENCODER / SEPARATOR / DECODER
    # =================================================================
    def encode(self, mixture) -> Tensor:
        """[T] waveform -> [N, frames] nonnegative representation."""
        mixture = self._as_input(mixture)
        cfg = self.config
        if mixture.ndim != 1:
            raise ValueError(f"Mixture must be a 1-D waveform, got shape {mixture.shape}.")
        if mixture.shape[0] < cfg.L:
            raise ValueError(f"Mixture has {mixture.shape[0]} samples; at least L={cfg.L} are required.")
        w = F.conv1d(F.reshape(mixture, (1, mixture.shape[0])), self._p("encoder", "weight"), stride=cfg.stride)
        return F.relu(w)

    def _block(self, y: Tensor, r: int, x: int):
        cfg = self.config

        # pointwise component: 1x1 B->H, PReLU, norm
        h = F.conv1d(y, self._b("pointwise", r, x, "input_weight"), self._b("pointwise", r, x, "input_bias"))
        h = F.prelu(h, self._b("pointwise", r, x, "prelu_slope"))
        if self.use_norm:
            h = F.global_layer_norm(h, self._b("pointwise", r, x, "norm_gain"), self._b("pointwise", r, x, "norm_bias"))

        # separable component: dilated depthwise conv, PReLU, norm, residual 1x1
        d = cfg.dilation(x)
        h = F.conv1d(
            h,
            self._b("separable", r, x, "depthwise_weight"),
            self._b("separable", r, x, "depthwise_bias"),
            dilation=d,
            padding=d * (cfg.P - 1) // 2,
            groups=cfg.H,
        )
        h = F.prelu(h, self._b("separable", r, x, "prelu_slope"))
        if self.use_norm:
            h = F.global_layer_norm(h, self._b("separable", r, x, "norm_gain"), self._b("separable", r, x, "norm_bias"))
        residual = F.conv1d(h, self._b("separable", r, x, "residual_weight"), self._b("separable", r, x, "residual_bias"))

        skip = None
        if cfg.skip_connections:
            skip = F.conv1d(h, self._b("pointwise", r, x, "skip_weight"), self._b("pointwise", r, x, "skip_bias"))
        return residual, skip

    def separate(self, features: Tensor) -> Tensor:
        """[N, frames] -> masks [C, N, frames]."""
        cfg = self.config
        if features.ndim != 2 or features.shape[0] != cfg.N:
            raise ValueError(f"Features must be [N={cfg.N}, frames], got shape {features.shape}.")
        y = features
        if self.use_norm:
            y = F.global_layer_norm(y, self._p("bottleneck", "norm_gain"), self._p("bottleneck", "norm_bias"))
        y = F.conv1d(y, self._p("bottleneck", "weight"), self._p("bottleneck", "bias"))

        skip_sum = None
        for r in range(cfg.R):
            for x in range(cfg.X):
                residual, skip = self._block(y, r, x)
                y = F.add(y, residual)
                if skip is not None:
                    skip_sum = skip if skip_sum is None else F.add(skip_sum, skip)

        out = skip_sum if cfg.skip_connections else y
        out = F.prelu(out, self._p("mask_head", "prelu_slope"))
        out = F.conv1d(out, self._p("mask_head", "weight"), self._p("mask_head", "bias"))
        out = F.reshape(out, (cfg.C, cfg.N, features.shape[1]))
        if cfg.mask_activation == "softmax":
            return F.softmax(out, axis=0)
        return F.sigmoid(out)

    def decode(self, masked: Tensor) -> Tensor:
        """[C, N, frames] -> [C, (frames-1)*stride + L] by overlap-add."""
        cfg = self.config
        if masked.ndim != 3 or masked.shape[1] != cfg.N:
            raise ValueError(f"Masked features must be [C, N={cfg.N}, frames], got shape {masked.shape}.")
        weight = self._p("decoder", "weight")
        outputs = []
        for c in range(masked.shape[0]):
            wave = F.conv_transpose1d(masked[c], weight, stride=cfg.stride)
            outputs.append(F.reshape(wave, (wave.shape[1],)))
        return F.stack(outputs, axis=0)

    def forward(self, mixture) -> SeparatorOutput:
        features = self.encode(mixture)
        masks = self.separate(features)
        masked = F.mul(masks, features)
        return SeparatorOutput(sources=self.decode(masked), masks=masks)

    __call__ = forward

    def separate_waveform(self, mixture: np.ndarray) -> np.ndarray:
        """Inference helper on plain arrays; records nothing."""
        return self.forward(np.asarray(mixture)).sources.data.astype(np.float64)
