"""
Audio package - WAV I/O, SNR mixing, noise injection and the synthetic corpus
"""

from .clip import AudioClip, MixtureRecord, SAMPLE_RATE, compose
from .wav_io import read_wav, write_wav
from .mixing import mix_at_snr, add_noise, measured_snr, NOISE_KINDS
from .corpus import generate_synthetic_corpus, write_corpus, MANIFEST_COLUMNS, MANIFEST_NAME

__all__ = [
    'AudioClip',
    'MixtureRecord',
    'SAMPLE_RATE',
    'compose',
    'read_wav',
    'write_wav',
    'mix_at_snr',
    'add_noise',
    'measured_snr',
    'NOISE_KINDS',
    'generate_synthetic_corpus',
    'write_corpus',
    'MANIFEST_COLUMNS',
    'MANIFEST_NAME',
]
