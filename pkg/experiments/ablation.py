"""
Sixteen-scheme sharing ablation plus the simplified controls.

Every run uses the same initialization seed, corpus and batch order, so
rows differ only in which block sites share tensors.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

import pandas as pd

from audio import MixtureRecord
from models import ModelConfig, audit, enumerate_ablation_grid, preset
from models.config import BASE_PRESET_NAMES, base_label, extra_stacks_variant, family_label, wide_hidden_variant
from models.sharing import UNSHARED, scheme_flags
from optimization import SeparationTrainer, TrainConfig
from utils import export_ablation_to_excel, plot_size_vs_si_snri, save_table
from .evaluation import evaluate_records, mean_sdri, mean_si_snri

TABLE_COLUMNS = [
    "model_label", "scheme", "sep_stack", "sep_dil", "pw_stack", "pw_dil",
    "size_params", "compression_pct", "si_snri_db", "sdri_db",
]
PLOT_COLUMNS = ["label", "params", "si_snri", "family"]


@dataclass
class ExperimentRow:
    model_label: str
    scheme: str
    sep_stack: int
    sep_dil: int
    pw_stack: int
    pw_dil: int
    size_params: int
    compression_pct: float
    si_snri_db: float
    sdri_db: float
    family: str  # base | shared | simplified | variant


@dataclass
class AblationJob:
    label: str
    family: str
    config: ModelConfig
    baseline: ModelConfig
    train: TrainConfig


@dataclass
class AblationResult:
    rows: List[ExperimentRow]
    table: pd.DataFrame
    plot_data: pd.DataFrame
    paths: Dict[str, str]


def scheme_label(config: ModelConfig) -> str:
    """'Conv-MiTAS_ss'-style label; the unshared model is the labeled base."""
    if config.sharing.is_unshared:
        return base_label(config)
    return f"{family_label(config)}_{config.sharing.code}"


def build_jobs(
    base_name: str,
    steps: int,
    seed: int,
    out_dir: str,
    variants: bool = False,
    segment: int = 8000,
    batch_size: int = 4,
) -> List[AblationJob]:
    """(n,n) base and the 15 shared schemes, then simplified1/2, then optional variants."""
    if base_name not in BASE_PRESET_NAMES:
        raise ValueError(f"Ablation base must be one of {BASE_PRESET_NAMES}, got '{base_name}'.")
    base = preset(base_name)
    baseline = base.with_sharing(UNSHARED)
    ckpt_dir = os.path.join(out_dir, "checkpoints")

    def job(label, family, config):
        train = TrainConfig(
            model=config,
            max_steps=steps,
            seed=seed,
            segment=segment,
            batch_size=batch_size,
            checkpoint_path=os.path.join(ckpt_dir, f"{_slug(label)}.ckpt"),
            log_every=max(steps // 10, 1),
        )
        return AblationJob(label, family, config, baseline, train)

    jobs = []
    for sharing in enumerate_ablation_grid():
        config = base.with_sharing(sharing)
        jobs.append(job(scheme_label(config), "base" if sharing.is_unshared else "shared", config))
    for k, name in enumerate(("simplified1", "simplified2"), start=1):
        jobs.append(job(f"Simplified-Base-Model{k}", "simplified", preset(name, base=base_name)))
    if variants:
        wide = wide_hidden_variant(base)
        deep = extra_stacks_variant(base)
        jobs.append(job(f"{family_label(wide)}_ss (H={wide.H})", "variant", wide))
        jobs.append(job(f"{family_label(deep)}_ss ({deep.R} stacks)", "variant", deep))
    return jobs


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in label).strip("_").lower()


def run_job(job: AblationJob, records: List[MixtureRecord], eval_records: Optional[List[MixtureRecord]] = None,
            verbose: bool = False) -> ExperimentRow:
    """Train one configuration and score it on ``eval_records`` (default: the training records)."""
    trainer = SeparationTrainer(job.train, records, verbose=verbose)
    trainer.train()
    results = evaluate_records(trainer.model, eval_records or records)
    report = audit(job.config, baseline=job.baseline)
    flags = scheme_flags(job.config.sharing)
    return ExperimentRow(
        model_label=job.label,
        scheme=job.config.sharing.code,
        sep_stack=int(flags[0]),
        sep_dil=int(flags[1]),
        pw_stack=int(flags[2]),
        pw_dil=int(flags[3]),
        size_params=report.total,
        compression_pct=round(report.compression_ratio, 4),
        si_snri_db=round(mean_si_snri(results), 6),
        sdri_db=round(mean_sdri(results), 6),
        family=job.family,
    )


def _run_job_args(args):
    return run_job(*args)


def run_ablation(
    base_name: str,
    records: List[MixtureRecord],
    steps: int,
    seed: int = 0,
    out_dir: str = "result/ablation",
    variants: bool = False,
    segment: int = 8000,
    batch_size: int = 4,
    eval_records: Optional[List[MixtureRecord]] = None,
    workers: int = 1,
    verbose: bool = True,
) -> AblationResult:
    """
    Train and evaluate every job of ``build_jobs`` and write the artifacts.

    Outputs in ``out_dir``: ``ablation_table.csv``, ``size_vs_si_snri.csv``, ``ablation.xlsx``,
    ``size_vs_si_snri.png``. With ``workers > 1`` runs go to separate processes; the
    rows are identical to a sequential run.
    """
    jobs = build_jobs(base_name, steps, seed, out_dir, variants, segment, batch_size)
    if verbose:
        print(f"   -> [Ablation] {len(jobs)} runs on {base_name}, {steps} steps each, seed {seed}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_job_args, [(job, records, eval_records, False) for job in jobs]))
    else:
        rows = []
        for k, job in enumerate(jobs, start=1):
            row = run_job(job, records, eval_records, verbose=False)
            rows.append(row)
            if verbose:
                print(f"   -> [Ablation] {k:2d}/{len(jobs)} {row.model_label:<34} size={row.size_params:>10,d} "
                      f"C.P.={row.compression_pct:6.2f}% SI-SNRi={row.si_snri_db:7.3f} dB")

    table = pd.DataFrame([asdict(r) for r in rows])[TABLE_COLUMNS]
    if verbose:
        ss_size = rows[[r.scheme for r in rows[:16]].index("ss")].size_params
        one_stack = rows[16].size_params
        print(f"   -> [Ablation] (s,s) size {ss_size:,d} {'==' if ss_size == one_stack else '!='} "
              f"Simplified-Base-Model1 size {one_stack:,d}")
    plot_data = pd.DataFrame(
        [{"label": r.model_label, "params": r.size_params, "si_snri": r.si_snri_db, "family": r.family} for r in rows],
        columns=PLOT_COLUMNS,
    )

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "table": save_table(table, os.path.join(out_dir, "ablation_table.csv"), verbose=verbose),
        "plot_data": save_table(plot_data, os.path.join(out_dir, "size_vs_si_snri.csv"), verbose=verbose),
    }
    paths["workbook"] = export_ablation_to_excel(table, plot_data, os.path.join(out_dir, "ablation.xlsx"), verbose=verbose)
    paths["figure"] = plot_size_vs_si_snri(plot_data, os.path.join(out_dir, "size_vs_si_snri.png"), verbose=verbose)
    return AblationResult(rows=rows, table=table, plot_data=plot_data, paths=paths)
