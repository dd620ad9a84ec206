"""
Utils package
"""
from .data_loader import clean_column_names, load_manifest, load_corpus
from .file_handler import (
    Checkpoint,
    save_checkpoint,
    load_checkpoint,
    restore_store,
    load_model,
    save_table,
)
from .consistency_checker import find_violations, relative_error
from .excel_exporter import export_ablation_to_excel
from .plot_exporter import plot_size_vs_si_snri

__all__ = [
    'clean_column_names',
    'load_manifest',
    'load_corpus',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'restore_store',
    'load_model',
    'save_table',
    'find_violations',
    'relative_error',
    'export_ablation_to_excel',
    'plot_size_vs_si_snri',
]
