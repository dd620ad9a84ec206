"""
Primitive set of the separation network: elementwise arithmetic, reductions,
1-D (transposed) convolution, global layer normalization and activations.

Every primitive computes its forward with numpy and registers a closure that
maps the output gradient to input gradients.
"""

from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, as_tensor, make_output

NORM_EPS = 1e-8


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (reverse of numpy broadcasting)."""
    if grad.shape == tuple(shape):
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _pair(a, b):
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


# =================================================================
#  ELEMENTWISE
# =================================================================
def add(a, b) -> Tensor:
    a, b = _pair(a, b)

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_output(a.data + b.data, (a, b), _backward, "add")


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)

    def _backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_output(a.data - b.data, (a, b), _backward, "sub")


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)

    def _backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_output(a.data * b.data, (a, b), _backward, "mul")


def div(a, b) -> Tensor:
    a, b = _pair(a, b)

    def _backward(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return make_output(a.data / b.data, (a, b), _backward, "div")


def log10(x: Tensor) -> Tensor:
    scale = 1.0 / np.log(10.0)

    def _backward(g):
        return (g * scale / x.data,)

    return make_output(np.log10(x.data), (x,), _backward, "log10")


def clamp(x: Tensor, low: float, high: float) -> Tensor:
    """Clip to [low, high]; gradient is zero where clipping is active."""
    inside = (x.data >= low) & (x.data <= high)

    def _backward(g):
        return (g * inside,)

    return make_output(np.clip(x.data, low, high), (x,), _backward, "clamp")


# =================================================================
#  SHAPE & REDUCTION
# =================================================================
def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    def _backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    out = np.sum(x.data, axis=axis, keepdims=keepdims)
    return make_output(np.asarray(out, dtype=x.dtype), (x,), _backward, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / float(count))


def reshape(x: Tensor, shape) -> Tensor:
    def _backward(g):
        return (g.reshape(x.shape),)

    return make_output(x.data.reshape(shape), (x,), _backward, "reshape")


def getitem(x: Tensor, index) -> Tensor:
    def _backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return make_output(np.array(x.data[index]), (x,), _backward, "getitem")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)

    def _backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    data = np.stack([t.data for t in tensors], axis=axis)
    return make_output(data, tensors, _backward, "stack")


def dot(a: Tensor, b: Tensor) -> Tensor:
    """Inner product of two equally shaped tensors."""
    return sum(mul(a, b))


# =================================================================
#  ACTIVATIONS
# =================================================================
def relu(x: Tensor) -> Tensor:
    positive = x.data > 0

    def _backward(g):
        return (g * positive,)

    return make_output(np.where(positive, x.data, 0).astype(x.dtype), (x,), _backward, "relu")


def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """x for x >= 0, slope * x otherwise; ``slope`` holds a single learnable value."""
    if slope.size != 1:
        raise ValueError(f"prelu slope must have exactly 1 element, got shape {slope.shape}.")
    negative = x.data < 0
    a = slope.data.reshape(())

    def _backward(g):
        gx = np.where(negative, g * a, g)
        gs = np.sum(np.where(negative, g * x.data, 0)).reshape(slope.shape)
        return gx, gs

    out = np.where(negative, a * x.data, x.data).astype(x.dtype)
    return make_output(out, (x, slope), _backward, "prelu")


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so exp never overflows
    z = x.data
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)

    def _backward(g):
        return (g * out * (1.0 - out),)

    return make_output(out, (x,), _backward, "sigmoid")


def softmax(x: Tensor, axis: int = 0) -> Tensor:
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / np.sum(e, axis=axis, keepdims=True)

    def _backward(g):
        inner = np.sum(g * out, axis=axis, keepdims=True)
        return (out * (g - inner),)

    return make_output(out, (x,), _backward, "softmax")


# =================================================================
#  CONVOLUTION
# =================================================================
def conv_output_length(length: int, kernel_size: int, stride: int = 1, dilation: int = 1, padding: int = 0) -> int:
    return (length + 2 * padding - dilation * (kernel_size - 1) - 1) // stride + 1


def conv1d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    dilation: int = 1,
    padding: int = 0,
    groups: int = 1,
) -> Tensor:
    """Grouped, dilated 1-D cross-correlation.

    Shapes: ``x`` [C_in, T], ``weight`` [C_out, C_in/groups, K], ``bias`` [C_out]
    -> [C_out, T_out] with T_out = floor((T + 2p - d(K-1) - 1)/stride) + 1.
    """
    if x.ndim != 2:
        raise ValueError(f"conv1d input must be [C_in, T], got shape {x.shape}.")
    if weight.ndim != 3:
        raise ValueError(f"conv1d weight must be [C_out, C_in/groups, K], got shape {weight.shape}.")
    c_in, length = x.shape
    c_out, c_in_group, k = weight.shape
    if stride < 1 or dilation < 1 or padding < 0 or groups < 1:
        raise ValueError(f"Invalid geometry stride={stride}, dilation={dilation}, padding={padding}, groups={groups}.")
    if c_in % groups != 0:
        raise ValueError(f"C_in={c_in} is not divisible by groups={groups}.")
    if c_out % groups != 0:
        raise ValueError(f"C_out={c_out} is not divisible by groups={groups}.")
    if c_in_group != c_in // groups:
        raise ValueError(f"weight dim 1 is {c_in_group}, expected C_in/groups={c_in // groups}.")
    if bias is not None and bias.shape != (c_out,):
        raise ValueError(f"bias shape {bias.shape} does not match C_out={c_out}.")
    span = dilation * (k - 1) + 1
    if length + 2 * padding < span:
        raise ValueError(f"T={length} (+2*padding={2 * padding}) is shorter than the dilated kernel span {span}.")

    t_out = conv_output_length(length, k, stride, dilation, padding)
    padded = np.pad(x.data, ((0, 0), (padding, padding))) if padding else x.data

    # [C_in, T_pad - span + 1, span] -> dilated taps -> strided frames
    windows = sliding_window_view(padded, span, axis=1)[:, ::stride, ::dilation][:, :t_out, :]
    cols = windows.reshape(groups, c_in_group, t_out, k)
    w = weight.data.reshape(groups, c_out // groups, c_in_group, k)
    out = np.einsum("gitk,goik->got", cols, w, optimize=True).reshape(c_out, t_out)
    if bias is not None:
        out = out + bias.data[:, None]
    out = out.astype(x.dtype, copy=False)

    def _backward(g):
        gg = g.reshape(groups, c_out // groups, t_out)
        grad_w = np.einsum("got,gitk->goik", gg, cols, optimize=True).reshape(weight.shape)
        grad_cols = np.einsum("got,goik->gitk", gg, w, optimize=True).reshape(c_in, t_out, k)
        grad_padded = np.zeros_like(padded)
        last = stride * (t_out - 1) + 1
        for tap in range(k):
            start = tap * dilation
            grad_padded[:, start:start + last:stride] += grad_cols[:, :, tap]
        grad_x = grad_padded[:, padding:padding + length] if padding else grad_padded
        grad_b = g.sum(axis=1) if bias is not None else None
        return grad_x, grad_w, grad_b

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return make_output(out, inputs, _backward, "conv1d")


def conv_transpose1d(x: Tensor, weight: Tensor, stride: int = 1) -> Tensor:
    """Overlap-add transposed convolution, the adjoint of ``conv1d`` with the same geometry.

    Shapes: ``x`` [C_in, T], ``weight`` [C_in, C_out, K] -> [C_out, (T-1)*stride + K].
    """
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}.")
    if x.ndim != 2:
        raise ValueError(f"conv_transpose1d input must be [C_in, T], got shape {x.shape}.")
    if weight.ndim != 3 or weight.shape[0] != x.shape[0]:
        raise ValueError(f"weight shape {weight.shape} does not match C_in={x.shape[0]} (expected [C_in, C_out, K]).")
    c_in, length = x.shape
    _, c_out, k = weight.shape
    t_out = (length - 1) * stride + k
    last = stride * (length - 1) + 1

    contrib = np.einsum("it,iok->otk", x.data, weight.data, optimize=True)
    out = np.zeros((c_out, t_out), dtype=x.dtype)
    for tap in range(k):
        out[:, tap:tap + last:stride] += contrib[:, :, tap]

    def _backward(g):
        # gather the frames each input step wrote to: [C_out, T, K]
        g_cols = np.stack([g[:, tap:tap + last:stride] for tap in range(k)], axis=-1)
        grad_x = np.einsum("otk,iok->it", g_cols, weight.data, optimize=True)
        grad_w = np.einsum("it,otk->iok", x.data, g_cols, optimize=True)
        return grad_x, grad_w

    return make_output(out, (x, weight), _backward, "conv_transpose1d")


# =================================================================
#  NORMALIZATION
# =================================================================
def global_layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = NORM_EPS) -> Tensor:
    """Normalize over all C*T entries, then apply per-channel gain and bias."""
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}.")
    if x.ndim != 2:
        raise ValueError(f"global_layer_norm input must be [C, T], got shape {x.shape}.")
    channels = x.shape[0]
    if gain.shape != (channels,) or bias.shape != (channels,):
        raise ValueError(f"gain/bias shapes {gain.shape}/{bias.shape} do not match C={channels}.")

    count = x.size
    centered = x.data - x.data.mean()
    var = np.mean(centered * centered)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std
    out = (gain.data[:, None] * x_hat + bias.data[:, None]).astype(x.dtype)

    def _backward(g):
        g_hat = g * gain.data[:, None]
        grad_x = inv_std / count * (count * g_hat - g_hat.sum() - x_hat * np.sum(g_hat * x_hat))
        return grad_x, np.sum(g * x_hat, axis=1), g.sum(axis=1)

    return make_output(out, (x, gain, bias), _backward, "global_layer_norm")
