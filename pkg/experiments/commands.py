"""
Command implementations behind the CLI. Each returns its result object and
writes its artifacts; argument parsing lives in main.py.
"""

import os
from typing import List, Optional, Sequence

import pandas as pd

from audio import generate_synthetic_corpus, read_wav, write_corpus, write_wav
from audio.clip import AudioClip, SAMPLE_RATE
from models import ModelConfig, ParamReport, SharingConfig, audit, preset
from models.config import extra_stacks_variant, family_base, wide_hidden_variant
from models.parameter_store import reports_to_frame
from optimization import SeparationTrainer, TrainConfig, TrainResult
from utils import load_corpus, load_model, save_table
from .ablation import AblationResult, run_ablation, scheme_label
from .evaluation import evaluate_records, results_frame
from .robustness import DEFAULT_SHIFTS, DEFAULT_SNRS, noise_test, shift_test


def resolve_config(preset_name: str, scheme: str = "nn", base: str = "convtasnet_base") -> ModelConfig:
    return preset(preset_name, base=base).with_sharing(SharingConfig.parse(scheme))


def compression_baseline(preset_name: str, base: str = "convtasnet_base") -> ModelConfig:
    """Unshared original a preset's C.P. is measured against (the family base for simplified models)."""
    if preset_name in ("simplified1", "simplified2"):
        return preset(base)
    return family_base(preset(preset_name))


# =================================================================
#  TRAIN / EVAL / SEPARATE
# =================================================================
def cmd_train(config: TrainConfig, corpus: str, verbose: bool = True) -> TrainResult:
    records = load_corpus(corpus, verbose=verbose)
    return SeparationTrainer(config, records, verbose=verbose).train()


def cmd_eval(checkpoint: str, corpus: str, out_path: Optional[str] = None, workers: int = 1, verbose: bool = True) -> pd.DataFrame:
    model, _ = load_model(checkpoint, verbose=verbose)
    records = load_corpus(corpus, verbose=verbose)
    df = results_frame(evaluate_records(model, records, workers))
    if out_path:
        save_table(df, out_path, verbose=verbose)
    if verbose:
        mean = df.iloc[-1]
        print(f"   -> [Eval] {len(records)} utterances | SI-SNRi {mean['si_snri']:.3f} dB | SDRi {mean['sdri']:.3f} dB")
    return df


def cmd_separate(checkpoint: str, input_wav: str, out_dir: str, verbose: bool = True) -> List[str]:
    """Write one WAV per separated source (``<stem>_s1.wav`` ...)."""
    model, _ = load_model(checkpoint, verbose=verbose)
    mixture = read_wav(input_wav)
    estimates = model.separate_waveform(mixture.samples)
    stem = os.path.splitext(os.path.basename(input_wav))[0]
    paths = []
    for c, source in enumerate(estimates, start=1):
        path = os.path.join(out_dir, f"{stem}_s{c}.wav")
        write_wav(path, AudioClip(source, SAMPLE_RATE))
        paths.append(path)
    if verbose:
        print(f"   -> [Separate] {len(paths)} sources of {estimates.shape[1]} samples written to {out_dir}")
    return paths


# =================================================================
#  AUDIT / ABLATION
# =================================================================
def cmd_audit(preset_name: str, scheme: str = "nn", base: str = "convtasnet_base", out_path: Optional[str] = None,
              variants: bool = False, verbose: bool = True) -> List[ParamReport]:
    """Size / C.P. report of one preset under one scheme (plus the H-doubled and
    extra-stack variants when ``variants``)."""
    config = resolve_config(preset_name, scheme, base)
    baseline = compression_baseline(preset_name, base)
    reports = [audit(config, baseline=baseline, label=scheme_label(config))]
    if variants:
        for variant in (wide_hidden_variant(config), extra_stacks_variant(config)):
            label = f"{scheme_label(variant)} (H={variant.H}, R={variant.R})"
            reports.append(audit(variant, baseline=baseline, label=label))
    if verbose:
        for report in reports:
            print(report.to_text())
            print()
    if out_path:
        save_table(reports_to_frame(reports), out_path, verbose=verbose)
    return reports


def cmd_ablate(base: str, corpus: str, steps: int, seed: int = 0, out_dir: str = "result/ablation", variants: bool = False,
               segment: int = 8000, batch_size: int = 4, workers: int = 1, verbose: bool = True) -> AblationResult:
    records = load_corpus(corpus, verbose=verbose)
    return run_ablation(base, records, steps, seed=seed, out_dir=out_dir, variants=variants, segment=segment,
                        batch_size=batch_size, workers=workers, verbose=verbose)


# =================================================================
#  ROBUSTNESS
# =================================================================
def cmd_shift_test(checkpoint: str, corpus: str, record_index: int = 0, shifts: Sequence[int] = DEFAULT_SHIFTS,
                   out_path: Optional[str] = None, verbose: bool = True) -> pd.DataFrame:
    model, _ = load_model(checkpoint, verbose=verbose)
    records = load_corpus(corpus, verbose=verbose)
    if not 0 <= record_index < len(records):
        raise ValueError(f"Record index {record_index} outside the corpus (0..{len(records) - 1}).")
    df = shift_test(model, records[record_index], shifts)
    if out_path:
        save_table(df, out_path, verbose=verbose)
    if verbose:
        print(f"   -> [Shift] max |delta SI-SNRi| = {df['delta_si_snri_db'].abs().max():.4f} dB over {len(df)} shifts")
    return df


def cmd_noise_test(checkpoints: Sequence[str], corpus: str, kinds: Optional[Sequence[str]] = None,
                   snrs: Sequence[float] = DEFAULT_SNRS, noise_dir: Optional[str] = None, seed: int = 0,
                   out_path: Optional[str] = None, workers: int = 1, verbose: bool = True) -> pd.DataFrame:
    """One table row per checkpoint, labeled like the ablation rows."""
    models = {}
    for path in checkpoints:
        model, _ = load_model(path, verbose=verbose)
        label = scheme_label(model.config)
        models[label if label not in models else f"{label} [{os.path.basename(path)}]"] = model
    records = load_corpus(corpus, verbose=verbose)
    df = noise_test(models, records, kinds, snrs, noise_dir, seed, workers, verbose)
    if out_path:
        save_table(df, out_path, verbose=verbose)
    return df


# =================================================================
#  CORPUS
# =================================================================
def cmd_gen_corpus(count: int, duration: float, seed: int, out_dir: str, workers: int = 1, verbose: bool = True) -> str:
    records = generate_synthetic_corpus(count, duration, seed, workers=workers, verbose=verbose)
    return write_corpus(records, out_dir, verbose=verbose)
