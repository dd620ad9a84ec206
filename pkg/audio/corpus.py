"""
Synthetic two-speaker corpus.

Source 1 of every record is an amplitude-modulated harmonic tone whose
fundamental belongs to a "tone speaker"; source 2 is band-limited noise whose
pass band belongs to a "band speaker". The tone stays below 1 kHz and every
band lies above 1.4 kHz, so the two sources are nearly uncorrelated.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
import pandas as pd
from scipy.signal import butter, lfilter

from .clip import AudioClip, MixtureRecord, SAMPLE_RATE
from .mixing import mix_at_snr
from .wav_io import write_wav

TONE_SPEAKERS = (110.0, 145.0, 185.0, 230.0)  # fundamentals, Hz
BAND_SPEAKERS = ((1400.0, 2200.0), (1800.0, 2800.0), (2200.0, 3300.0), (2600.0, 3700.0))
TONE_CEILING_HZ = 1000.0
SNR_RANGE_DB = (-5.0, 5.0)
FILTER_WARMUP = 256

MANIFEST_NAME = "manifest.tsv"
MANIFEST_COLUMNS = ["id", "mixture_path", "source_paths", "snr_db", "noise", "seed"]


def bandpass_filter(data: np.ndarray, lowcut: float, highcut: float, fs: int = SAMPLE_RATE, order: int = 4) -> np.ndarray:
    nyq = 0.5 * fs
    low = max(lowcut / nyq, 1e-6)
    high = min(highcut / nyq, 0.999)
    b, a = butter(order, [low, high], btype="band")
    return lfilter(b, a, data)


def _envelope(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    rate = rng.uniform(2.0, 6.0)  # syllable-like modulation
    depth = rng.uniform(0.3, 0.6)
    return 1.0 - depth + depth * np.sin(2.0 * np.pi * rate * t + rng.uniform(0, 2 * np.pi))


def harmonic_tone(f0: float, length: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(length) / SAMPLE_RATE
    wave = np.zeros(length)
    k = 1
    while k * f0 < TONE_CEILING_HZ:
        wave += np.sin(2.0 * np.pi * k * f0 * t + rng.uniform(0, 2 * np.pi)) / k
        k += 1
    return wave * _envelope(t, rng)


def band_noise(band, length: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(length) / SAMPLE_RATE
    raw = rng.standard_normal(length + FILTER_WARMUP)
    filtered = bandpass_filter(raw, band[0], band[1])[FILTER_WARMUP:]
    return filtered * _envelope(t, rng)


def synthesize_record(index: int, length: int, seed: int) -> MixtureRecord:
    """Record ``index`` of the corpus; depends only on (index, length, seed)."""
    record_seed = seed ^ index
    rng = np.random.default_rng(record_seed)
    tone_id = int(rng.integers(len(TONE_SPEAKERS)))
    band_id = int(rng.integers(len(BAND_SPEAKERS)))
    snr_db = float(rng.uniform(*SNR_RANGE_DB))

    tone = AudioClip(harmonic_tone(TONE_SPEAKERS[tone_id], length, rng), SAMPLE_RATE)
    noise = AudioClip(band_noise(BAND_SPEAKERS[band_id], length, rng), SAMPLE_RATE)
    record = mix_at_snr(tone, noise, snr_db)
    record.seed = record_seed
    record.record_id = f"mix{index:04d}"
    record.meta = {"tone_speaker": tone_id, "band_speaker": band_id}
    return record


def generate_synthetic_corpus(count: int, duration_s: float, seed: int = 0, workers: int = 1, verbose: bool = False) -> List[MixtureRecord]:
    """Generate ``count`` seeded two-source mixtures of ``duration_s`` seconds.

    Records are independent (record i uses seed ^ i), so ``workers > 1``
    builds them on a thread pool with identical results.
    """
    if count < 1:
        raise ValueError(f"Corpus size must be >= 1, got {count}.")
    length = int(round(duration_s * SAMPLE_RATE))
    if length < 1:
        raise ValueError(f"Duration {duration_s}s is shorter than one sample at {SAMPLE_RATE} Hz.")

    start = time.time()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: synthesize_record(i, length, seed), range(count)))
    else:
        records = [synthesize_record(i, length, seed) for i in range(count)]

    if verbose:
        print(f"   -> [Corpus] generated {count} records of {duration_s:.2f}s in {time.time() - start:.2f}s (seed={seed})")
    return records


def write_corpus(records: List[MixtureRecord], out_dir: str, verbose: bool = True) -> str:
    """Write mixture and source WAVs plus a tab-separated manifest; returns the manifest path.

    Manifest columns: id, mixture_path, source_paths (';'-joined), snr_db,
    noise ('none' or '<kind>@<snr>dB|<noise wav>'), seed. Paths are relative to the
    manifest's folder.
    """
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for record in records:
        rid = record.record_id or f"mix{len(rows):04d}"
        mix_rel = os.path.join("wav", f"{rid}_mix.wav")
        write_wav(os.path.join(out_dir, mix_rel), record.mixture)
        source_rels = []
        for c, source in enumerate(record.sources, start=1):
            rel = os.path.join("wav", f"{rid}_s{c}.wav")
            write_wav(os.path.join(out_dir, rel), source)
            source_rels.append(rel)
        noise_info = record.noise_label
        if record.noise is not None:
            noise_rel = os.path.join("wav", f"{rid}_noise.wav")
            write_wav(os.path.join(out_dir, noise_rel), record.noise)
            noise_info = f"{noise_info}|{noise_rel}"
        rows.append({
            "id": rid,
            "mixture_path": mix_rel,
            "source_paths": ";".join(source_rels),
            "snr_db": record.snr_db,
            "noise": noise_info,
            "seed": record.seed,
        })

    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    pd.DataFrame(rows, columns=MANIFEST_COLUMNS).to_csv(manifest_path, sep="\t", index=False, float_format="%.6f")
    if verbose:
        print(f"   -> [Corpus] wrote {len(rows)} records to {out_dir} (manifest: {MANIFEST_NAME})")
    return manifest_path
