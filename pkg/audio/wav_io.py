"""
PCM-16 mono 8 kHz WAV reading and writing.
"""

import os

import numpy as np
import soundfile as sf

from .clip import AudioClip, SAMPLE_RATE

PCM_SCALE = 32768.0


def read_wav(path: str) -> AudioClip:
    """Read a PCM 16-bit mono 8 kHz WAV; any other format is rejected."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"WAV file {path} does not exist.")
    info = sf.info(path)
    problems = []
    if info.format != "WAV":
        problems.append(f"container={info.format}")
    if info.subtype != "PCM_16":
        problems.append(f"subtype={info.subtype}")
    if info.channels != 1:
        problems.append(f"channels={info.channels}")
    if info.samplerate != SAMPLE_RATE:
        problems.append(f"sample_rate={info.samplerate}")
    if problems:
        raise ValueError(
            f"{path}: unsupported WAV format ({', '.join(problems)}); "
            f"expected WAV PCM_16 mono {SAMPLE_RATE} Hz (no resampling is performed)."
        )
    pcm, _ = sf.read(path, dtype="int16", always_2d=False)
    return AudioClip(pcm.astype(np.float64) / PCM_SCALE, SAMPLE_RATE)


def quantize(samples: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(samples, dtype=np.float64) * PCM_SCALE), -32768, 32767).astype(np.int16)


def write_wav(path: str, clip: AudioClip):
    """
    Write ``clip`` as PCM-16; values are rounded to the nearest 1/32768 step.

    Samples are expected in [-1, 1]. Anything beyond the PCM-16 range is
    clamped, and the number of clamped samples is reported.
    """
    if clip.sample_rate != SAMPLE_RATE:
        raise ValueError(f"Clip sample rate {clip.sample_rate} Hz; only {SAMPLE_RATE} Hz is written.")
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    scaled = np.round(clip.samples * PCM_SCALE)
    clipped = int(np.count_nonzero((scaled > 32767) | (scaled < -32768)))
    if clipped:
        print(f"   -> [WAV] Warning: {clipped} sample(s) clamped to the PCM-16 range in {path}")
    sf.write(path, quantize(clip.samples), SAMPLE_RATE, subtype="PCM_16", format="WAV")
