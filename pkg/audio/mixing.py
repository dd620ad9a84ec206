"""
SNR-controlled mixing and noise injection.

Power is the mean square of a signal. Every produced record keeps the scaled
components it was summed from, so the mixture can be recomposed exactly.
"""

import glob
import os
from typing import Optional

import numpy as np

from .clip import AudioClip, MixtureRecord, SAMPLE_RATE, compose, require_rate
from .wav_io import read_wav

PEAK_TARGET = 0.9
NOISE_KINDS = ("gaussian", "file")


def fit_length(samples: np.ndarray, length: int) -> np.ndarray:
    """Loop (or trim) ``samples`` to exactly ``length`` values."""
    if samples.shape[0] == 0:
        raise ValueError("Cannot loop an empty signal.")
    return np.resize(samples, length)


def snr_gain(signal: np.ndarray, interference: np.ndarray, snr_db: float) -> float:
    """Factor alpha with 10*log10(P(signal) / P(alpha * interference)) == snr_db."""
    p_signal = float(np.mean(signal ** 2))
    p_interf = float(np.mean(interference ** 2))
    if p_signal <= 0.0:
        raise ValueError("Signal has zero power; the SNR is undefined.")
    if p_interf <= 0.0:
        raise ValueError("Interference has zero power; it cannot be scaled to a target SNR.")
    return float(np.sqrt(p_signal / (p_interf * 10.0 ** (snr_db / 10.0))))


def measured_snr(signal: np.ndarray, interference: np.ndarray) -> float:
    return float(10.0 * np.log10(np.mean(np.asarray(signal) ** 2) / np.mean(np.asarray(interference) ** 2)))


def _peak_normalize(record: MixtureRecord) -> MixtureRecord:
    """Scale every component so the recomposed mixture peaks at PEAK_TARGET."""
    peak = float(np.max(np.abs(record.mixture.samples)))
    if peak == 0.0:
        return record
    factor = PEAK_TARGET / peak
    sources = [s.samples * factor for s in record.sources]
    noise = record.noise.samples * factor if record.noise is not None else None
    record.sources = [AudioClip(s, SAMPLE_RATE) for s in sources]
    record.noise = AudioClip(noise, SAMPLE_RATE) if noise is not None else None
    record.mixture = AudioClip(compose(sources, noise), SAMPLE_RATE)
    record.gain *= factor
    return record


def mix_at_snr(signal: AudioClip, interference: AudioClip, snr_db: float, normalize: bool = True) -> MixtureRecord:
    """Two-source mixture: ``interference`` looped/trimmed to the signal and scaled to ``snr_db``.

    With ``normalize`` both sources are then scaled by one common factor so
    the mixture peaks at 0.9; the SNR between them is unchanged.
    """
    require_rate(signal, interference)
    target = signal.samples
    interf = fit_length(interference.samples, target.shape[0])
    alpha = snr_gain(target, interf, snr_db)
    sources = [target.copy(), interf * alpha]
    record = MixtureRecord(
        mixture=AudioClip(compose(sources), SAMPLE_RATE),
        sources=[AudioClip(s, SAMPLE_RATE) for s in sources],
        snr_db=float(snr_db),
    )
    return _peak_normalize(record) if normalize else record


def _noise_from_directory(noise_source: str, length: int, rng: np.random.Generator) -> np.ndarray:
    if not noise_source or not os.path.isdir(noise_source):
        raise FileNotFoundError(f"Noise directory {noise_source!r} does not exist.")
    files = sorted(glob.glob(os.path.join(noise_source, "*.wav")))
    if not files:
        raise ValueError(f"Noise directory {noise_source} contains no .wav files.")
    chosen = files[int(rng.integers(len(files)))]
    samples = read_wav(chosen).samples
    if samples.shape[0] == 0:
        raise ValueError(f"Noise file {chosen} is empty.")
    offset = int(rng.integers(samples.shape[0]))
    return fit_length(np.roll(samples, -offset), length)


def add_noise(
    mixture: MixtureRecord,
    kind: str,
    snr_db: float,
    noise_source: Optional[str] = None,
    seed: int = 0,
    normalize: bool = True,
) -> MixtureRecord:
    """Contaminate a clean mixture with gaussian or recorded noise at ``snr_db``
    relative to the MIXTURE's power. Pure function of its inputs and ``seed``."""
    if kind not in NOISE_KINDS:
        raise ValueError(f"Unknown noise kind '{kind}'. Expected one of {NOISE_KINDS}.")
    if mixture.noise is not None:
        raise ValueError(f"Record {mixture.record_id or '<unnamed>'} already carries {mixture.noise_label} noise.")
    require_rate(mixture.mixture)

    rng = np.random.default_rng(seed)
    clean = mixture.mixture.samples
    if kind == "gaussian":
        raw = rng.standard_normal(clean.shape[0])
    else:
        raw = _noise_from_directory(noise_source, clean.shape[0], rng)
    noise = raw * snr_gain(clean, raw, snr_db)

    sources = [s.samples.copy() for s in mixture.sources]
    record = MixtureRecord(
        mixture=AudioClip(compose(sources, noise), SAMPLE_RATE),
        sources=[AudioClip(s, SAMPLE_RATE) for s in sources],
        snr_db=mixture.snr_db,
        noise=AudioClip(noise, SAMPLE_RATE),
        noise_kind=kind,
        noise_snr_db=float(snr_db),
        gain=mixture.gain,
        seed=mixture.seed,
        record_id=mixture.record_id,
        meta=dict(mixture.meta),
    )
    return _peak_normalize(record) if normalize else record
