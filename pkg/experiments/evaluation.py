"""
Corpus-level evaluation of a frozen model.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
import pandas as pd

from audio import MixtureRecord
from metrics import EvalResult, evaluate
from models import SeparationModel


def evaluate_record(model: SeparationModel, record: MixtureRecord, scheme: str = "") -> EvalResult:
    mixture = record.mixture.samples
    estimates = model.separate_waveform(mixture)
    return evaluate(mixture, estimates, record.references(), utterance_id=record.record_id, scheme=scheme)


def evaluate_records(model: SeparationModel, records: List[MixtureRecord], workers: int = 1) -> List[EvalResult]:
    """Evaluate every record; with ``workers > 1`` utterances fan out over threads.

    Inference outside a tape records nothing, so the frozen model is shared
    by the threads as is. Results keep the record order.
    """
    scheme = model.config.sharing.code
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda r: evaluate_record(model, r, scheme), records))
    return [evaluate_record(model, r, scheme) for r in records]


def mean_si_snri(results: List[EvalResult]) -> float:
    return float(np.mean([r.si_snri for r in results])) if results else float("nan")


def mean_sdri(results: List[EvalResult]) -> float:
    return float(np.mean([r.sdri for r in results])) if results else float("nan")


def results_frame(results: List[EvalResult]) -> pd.DataFrame:
    """Per-utterance rows followed by a 'mean' row."""
    df = pd.DataFrame([r.to_row() for r in results])
    mean_row = {col: "" for col in df.columns}
    mean_row["utterance_id"] = "mean"
    mean_row["scheme"] = results[0].scheme if results else ""
    for col in ("si_snr", "si_snri", "sdr", "sdri"):
        mean_row[col] = float(df[col].mean())
    return pd.concat([df, pd.DataFrame([mean_row])], ignore_index=True)
