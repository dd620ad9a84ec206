from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

SAMPLE_RATE = 8000


@dataclass
class AudioClip:
    """Mono float64 waveform.

    Samples are nominally in [-1, 1]; intermediate mixes may exceed it and
    are only clamped when written to PCM-16 (see ``write_wav``).
    """

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"AudioClip samples must be 1-D, got shape {self.samples.shape}.")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioClip samples contain non-finite values.")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate

    @property
    def power(self) -> float:
        return float(np.mean(self.samples ** 2)) if len(self) else 0.0


@dataclass
class MixtureRecord:
    """A mixture together with the exact components it was summed from.

    ``mixture`` equals ``sources[0] + sources[1] + ... + noise`` summed left
    to right in float64 (see ``compose``).
    """

    mixture: AudioClip
    sources: List[AudioClip]
    snr_db: float
    noise: Optional[AudioClip] = None
    noise_kind: str = "none"
    noise_snr_db: Optional[float] = None
    gain: float = 1.0  # cumulative peak-normalization factor
    seed: int = 0
    record_id: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def noise_label(self) -> str:
        if self.noise is None:
            return "none"
        return f"{self.noise_kind}@{self.noise_snr_db:g}dB"

    def references(self) -> np.ndarray:
        return np.stack([s.samples for s in self.sources])


def compose(sources: List[np.ndarray], noise: Optional[np.ndarray] = None) -> np.ndarray:
    total = np.array(sources[0], dtype=np.float64, copy=True)
    for s in sources[1:]:
        total = total + s
    if noise is not None:
        total = total + noise
    return total


def require_rate(*clips: AudioClip):
    for clip in clips:
        if clip.sample_rate != SAMPLE_RATE:
            raise ValueError(f"Clip sample rate {clip.sample_rate} Hz; the pipeline runs at {SAMPLE_RATE} Hz only.")
