"""
Robustness protocols: start-point shift sensitivity and noisy-input grid.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from audio import MixtureRecord, add_noise
from metrics import evaluate
from models import SeparationModel
from models.parameter_store import count_parameters
from .evaluation import evaluate_records, mean_si_snri

DEFAULT_SHIFTS = tuple(range(0, 251, 25))
DEFAULT_SNRS = (0, 3, 5)
DEFAULT_KINDS = ("gaussian", "file")
KIND_PREFIX = {"gaussian": "gau", "file": "mus"}


def default_kinds(noise_dir: Optional[str]) -> Tuple[str, ...]:
    return DEFAULT_KINDS if noise_dir else DEFAULT_KINDS[:1]


def shift_test(model: SeparationModel, record: MixtureRecord, shifts: Sequence[int] = DEFAULT_SHIFTS) -> pd.DataFrame:
    """
    SI-SNRi of the separation of ``x[s:]`` against ``refs[:, s:]`` for every shift.

    Returns columns (shift, si_snri_db, delta_si_snri_db) where the delta is
    taken against the unshifted input, so shift 0 has delta exactly 0.
    """
    shifts = sorted(set(int(s) for s in shifts) | {0})
    if shifts[0] < 0:
        raise ValueError(f"Shifts must be >= 0, got {shifts[0]}.")
    mixture = record.mixture.samples
    references = record.references()
    needed = shifts[-1] + model.config.L
    if mixture.shape[0] < needed:
        raise ValueError(
            f"Mixture has {mixture.shape[0]} samples; shift {shifts[-1]} needs at least {needed} (max shift + L)."
        )

    scores = {}
    for s in shifts:
        estimates = model.separate_waveform(mixture[s:])
        scores[s] = evaluate(mixture[s:], estimates, references[:, s:]).si_snri
    rows = [{"shift": s, "si_snri_db": scores[s], "delta_si_snri_db": scores[s] - scores[0]} for s in shifts]
    return pd.DataFrame(rows, columns=["shift", "si_snri_db", "delta_si_snri_db"])


def noise_column(kind: str, snr_db: float) -> str:
    return f"{KIND_PREFIX.get(kind, kind)}_{snr_db:g}db"


def contaminate(records: List[MixtureRecord], kind: str, snr_db: float, noise_dir: Optional[str], seed: int) -> List[MixtureRecord]:
    """Noisy copy of every record; record i draws its noise with seed ^ i."""
    return [add_noise(r, kind, snr_db, noise_source=noise_dir, seed=seed ^ i) for i, r in enumerate(records)]


def noise_test(
    models: Dict[str, SeparationModel],
    records: List[MixtureRecord],
    kinds: Optional[Sequence[str]] = None,
    snrs: Sequence[float] = DEFAULT_SNRS,
    noise_dir: Optional[str] = None,
    seed: int = 0,
    workers: int = 1,
    verbose: bool = True,
) -> pd.DataFrame:
    """
    Mean SI-SNRi per model under each (noise kind, SNR) plus the clean condition.

    One row per model (insertion order of ``models``); columns are
    model_label, scheme, size_params, clean, then kind-major / SNR-minor
    cells such as ``gau_0db`` ... ``mus_5db``.

    ``kinds`` defaults to gaussian, plus recorded noise when ``noise_dir`` is set.
    """
    kinds = default_kinds(noise_dir) if kinds is None else tuple(kinds)
    if "file" in kinds and not noise_dir:
        raise ValueError("Recorded-noise ('file') conditions need a noise directory (--noise-dir).")

    noisy_sets = {}
    for kind in kinds:
        for snr in snrs:
            noisy_sets[noise_column(kind, snr)] = contaminate(records, kind, snr, noise_dir, seed)

    rows = []
    for label, model in models.items():
        row = {
            "model_label": label,
            "scheme": model.config.sharing.code,
            "size_params": count_parameters(model.config)[0],
            "clean": mean_si_snri(evaluate_records(model, records, workers)),
        }
        for column, noisy in noisy_sets.items():
            row[column] = mean_si_snri(evaluate_records(model, noisy, workers))
        rows.append(row)
        if verbose:
            cells = " ".join(f"{k}={v:6.2f}" for k, v in row.items() if k not in ("model_label", "scheme", "size_params"))
            print(f"   -> [Noise] {label}: {cells}")
    return pd.DataFrame(rows, columns=["model_label", "scheme", "size_params", "clean", *noisy_sets.keys()])

