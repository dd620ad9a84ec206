"""
Metrics package - SI-SNR / SDR scores and the permutation-invariant loss
"""

from .objectives import (
    EvalResult,
    si_snr,
    sdr,
    si_snri,
    sdri,
    evaluate,
    pit_loss,
    pit_loss_value,
    si_snr_tensor,
    best_permutation,
)

__all__ = [
    'EvalResult',
    'si_snr',
    'sdr',
    'si_snri',
    'sdri',
    'evaluate',
    'pit_loss',
    'pit_loss_value',
    'si_snr_tensor',
    'best_permutation',
]
