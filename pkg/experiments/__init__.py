"""
Experiments package - ablation, robustness protocols and CLI command bodies
"""

from .evaluation import evaluate_records, results_frame, mean_si_snri, mean_sdri
from .ablation import ExperimentRow, AblationResult, build_jobs, run_ablation, scheme_label
from .robustness import shift_test, noise_test, contaminate
from .commands import (
    cmd_train,
    cmd_eval,
    cmd_separate,
    cmd_audit,
    cmd_ablate,
    cmd_shift_test,
    cmd_noise_test,
    cmd_gen_corpus,
)

__all__ = [
    'evaluate_records',
    'results_frame',
    'mean_si_snri',
    'mean_sdri',
    'ExperimentRow',
    'AblationResult',
    'build_jobs',
    'run_ablation',
    'scheme_label',
    'shift_test',
    'noise_test',
    'contaminate',
    'cmd_train',
    'cmd_eval',
    'cmd_separate',
    'cmd_audit',
    'cmd_ablate',
    'cmd_shift_test',
    'cmd_noise_test',
    'cmd_gen_corpus',
]
