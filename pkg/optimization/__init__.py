"""
Optimization package - Adam with gradient clipping and the PIT training loop
"""

from .adam import AdamOptimizer, clip_grad_norm, global_grad_norm
from .trainer import SeparationTrainer, TrainConfig, TrainResult, TrainingDivergedError

__all__ = [
    'AdamOptimizer',
    'clip_grad_norm',
    'global_grad_norm',
    'SeparationTrainer',
    'TrainConfig',
    'TrainResult',
    'TrainingDivergedError',
]
