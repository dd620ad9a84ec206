"""
Models package - separation network, sharing schemes and parameter audit
"""

from .sharing import (
    SharingScheme,
    SharingConfig,
    ParamKey,
    canonicalize,
    unique_site_count,
    enumerate_ablation_grid,
)
from .config import ModelConfig, preset, receptive_field
from .parameter_store import ParameterStore, ParamReport, audit, build_store, unshare, fold_gradients
from .separation_model import SeparationModel, SeparatorOutput

__all__ = [
    'SharingScheme',
    'SharingConfig',
    'ParamKey',
    'canonicalize',
    'unique_site_count',
    'enumerate_ablation_grid',
    'ModelConfig',
    'preset',
    'receptive_field',
    'ParameterStore',
    'ParamReport',
    'audit',
    'build_store',
    'unshare',
    'fold_gradients',
    'SeparationModel',
    'SeparatorOutput',
]
