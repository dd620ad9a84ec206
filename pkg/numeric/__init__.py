"""
Numeric package - dense tensors, recording tape and the model's primitives
"""

from .tensor import Tensor, Tape, backward, active_tape
from . import functional

__all__ = ['Tensor', 'Tape', 'backward', 'active_tape', 'functional']
