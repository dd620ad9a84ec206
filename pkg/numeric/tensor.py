"""
Dense tensors with tape-based reverse-mode differentiation.
"""

import threading
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

SUPPORTED_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))

# one stack of recording tapes per thread; frozen inference never touches it
_state = threading.local()


def _tape_stack() -> List["Tape"]:
    if not hasattr(_state, "stack"):
        _state.stack = []
    return _state.stack


def active_tape() -> Optional["Tape"]:
    """Return the innermost recording tape of the calling thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Dense row-major array with an optional gradient buffer.

    Parameters
    ----------
    data : array-like
        Values; converted to ``dtype`` (float32 unless the input is float64).
    requires_grad : bool
        Leaves with this flag receive ``grad`` after ``Tape.backward``.
    dtype : numpy dtype, optional
        float32 (training) or float64 (verification).
    """

    __slots__ = ("data", "grad", "requires_grad", "_tape", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if dtype is None:
            dtype = np.float64 if getattr(data, "dtype", None) == np.float64 else np.float32
        dtype = np.dtype(dtype)
        if dtype not in SUPPORTED_DTYPES:
            raise ValueError(f"Unsupported dtype {dtype}; expected float32 or float64.")
        self.data = np.ascontiguousarray(np.asarray(data, dtype=dtype))
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._tape: Optional["Tape"] = None

    # --- properties ---
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got shape {self.shape}.")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    # --- operator sugar (delegates to numeric.functional) ---
    def __add__(self, other):
        from . import functional as F
        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import functional as F
        return F.sub(self, other)

    def __rsub__(self, other):
        from . import functional as F
        return F.sub(other, self)

    def __mul__(self, other):
        from . import functional as F
        return F.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from . import functional as F
        return F.div(self, other)

    def __neg__(self):
        from . import functional as F
        return F.mul(self, -1.0)

    def __getitem__(self, index):
        from . import functional as F
        return F.getitem(self, index)

    def sum(self, axis=None, keepdims: bool = False):
        from . import functional as F
        return F.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        from . import functional as F
        return F.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        from . import functional as F
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _Record:
    __slots__ = ("output", "inputs", "backward_fn", "name")

    def __init__(self, output: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, name: str):
        self.output = output
        self.inputs = inputs
        self.backward_fn = backward_fn
        self.name = name


class Tape:
    """Ordered record of primitive applications.

    Use as a context manager around a forward pass; ``backward`` replays the
    records in reverse order and accumulates ``grad`` on every leaf that
    requires it. A tape can be consumed once; ``reset`` clears it for reuse.
    """

    def __init__(self):
        self.records: List[_Record] = []
        self.consumed = False

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.records)

    def record(self, output: Tensor, inputs: Sequence[Tensor], backward_fn: BackwardFn, name: str = ""):
        if self.consumed:
            raise RuntimeError("Cannot record on a consumed tape; call reset() first.")
        output._tape = self
        self.records.append(_Record(output, tuple(inputs), backward_fn, name))

    def reset(self):
        for rec in self.records:
            rec.output._tape = None
        self.records = []
        self.consumed = False

    def backward(self, loss: Tensor):
        """Populate ``grad`` of every reachable leaf with dLoss/dLeaf."""
        if self.consumed:
            raise RuntimeError("backward() already ran on this tape; reset() it before reuse.")
        if loss.size != 1:
            raise RuntimeError(f"backward() needs a scalar loss, got shape {loss.shape}.")
        if loss._tape is not self:
            raise RuntimeError("Loss was not recorded on this tape.")

        grads = {id(loss): np.ones_like(loss.data)}
        produced = {id(rec.output) for rec in self.records}

        for rec in reversed(self.records):
            g_out = grads.pop(id(rec.output), None)
            if g_out is None:
                continue
            input_grads = rec.backward_fn(g_out)
            for tensor, g in zip(rec.inputs, input_grads):
                if g is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in produced:
                    if key in grads:
                        grads[key] = grads[key] + g
                    else:
                        grads[key] = g
                else:
                    # leaf: accumulate into the persistent buffer
                    g = np.asarray(g, dtype=tensor.dtype).reshape(tensor.shape)
                    tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g

        self.consumed = True


def backward(loss: Tensor):
    """Run reverse-mode differentiation on the tape that recorded ``loss``."""
    if loss._tape is None:
        raise RuntimeError("Loss was not recorded on any tape (forward ran outside `with Tape():`).")
    loss._tape.backward(loss)


def make_output(data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn, name: str) -> Tensor:
    """Wrap a primitive result, recording it when a tape is active and any input needs grad."""
    tape = active_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs_grad, dtype=data.dtype)
    if needs_grad:
        tape.record(out, inputs, backward_fn, name)
    return out


def as_tensor(value, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype if dtype is not None else np.float64), dtype=dtype)
