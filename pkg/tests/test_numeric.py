import numpy as np
import pytest

from numeric import Tape, Tensor, backward
from numeric import functional as F
from utils import relative_error


def _t(values, grad=False):
    return Tensor(np.asarray(values, dtype=np.float64), requires_grad=grad, dtype=np.float64)


def _numeric_grad(fn, array, h=1e-6):
    """Central differences of the scalar ``fn()`` with respect to every entry of ``array`` (in place)."""
    grad = np.zeros_like(array)
    for idx in np.ndindex(array.shape):
        old = array[idx]
        array[idx] = old + h
        up = fn()
        array[idx] = old - h
        down = fn()
        array[idx] = old
        grad[idx] = (up - down) / (2 * h)
    return grad


def _analytic_grads(build, leaves):
    for leaf in leaves:
        leaf.zero_grad()
    with Tape() as tape:
        loss = build()
    tape.backward(loss)
    return [leaf.grad for leaf in leaves]


# =================================================================
#  CONVOLUTION
# =================================================================
def test_conv1d_identity_kernel():
    out = F.conv1d(_t([[1.0, 2.0, 3.0]]), _t([[[1.0]]]))
    np.testing.assert_array_equal(out.data, [[1.0, 2.0, 3.0]])


def test_conv1d_dilated_sum():
    out = F.conv1d(_t([[1.0, 2.0, 3.0, 4.0]]), _t([[[1.0, 1.0]]]), dilation=2)
    np.testing.assert_array_equal(out.data, [[4.0, 6.0]])


@pytest.mark.parametrize("stride,dilation,padding,groups", [(1, 1, 0, 1), (2, 1, 0, 1), (1, 4, 4, 2), (3, 2, 1, 1)])
def test_conv1d_output_length(stride, dilation, padding, groups):
    x = _t(np.ones((4, 23)))
    w = _t(np.ones((6, 4 // groups, 3)))
    out = F.conv1d(x, w, stride=stride, dilation=dilation, padding=padding, groups=groups)
    assert out.shape == (6, F.conv_output_length(23, 3, stride, dilation, padding))


def test_conv1d_rejects_bad_geometry():
    with pytest.raises(ValueError):
        F.conv1d(_t(np.ones((3, 10))), _t(np.ones((4, 1, 3))), groups=2)
    with pytest.raises(ValueError):
        F.conv1d(_t(np.ones((1, 3))), _t(np.ones((1, 1, 3))), dilation=2)


def test_conv_transpose_single_frame_copies_kernel():
    w = np.arange(1.0, 5.0).reshape(1, 1, 4)
    out = F.conv_transpose1d(_t([[1.0]]), _t(w), stride=2)
    np.testing.assert_array_equal(out.data, [[1.0, 2.0, 3.0, 4.0]])


def test_conv_transpose_length():
    out = F.conv_transpose1d(_t(np.ones((3, 3))), _t(np.ones((3, 2, 4))), stride=2)
    assert out.shape == (2, 8)


def test_conv_transpose_is_adjoint_of_conv(rng):
    # <conv(x), y> == <x, conv_transpose(y)> for the same weight and stride
    x = rng.standard_normal((1, 22))
    w = rng.standard_normal((5, 1, 4))
    conv = F.conv1d(_t(x), _t(w), stride=2)
    y = rng.standard_normal(conv.shape)
    back = F.conv_transpose1d(_t(y), _t(w), stride=2)
    lhs = float(np.sum(conv.data * y))
    rhs = float(np.sum(x[:, :back.shape[1]] * back.data))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


# =================================================================
#  NORMALIZATION / ACTIVATIONS
# =================================================================
def test_gln_constant_input_maps_to_bias():
    out = F.global_layer_norm(_t(np.full((3, 5), 7.0)), _t(np.ones(3)), _t(np.zeros(3)))
    np.testing.assert_array_equal(out.data, np.zeros((3, 5)))


def test_gln_moments(rng):
    x = 3.0 + 2.0 * rng.standard_normal((4, 50))
    out = F.global_layer_norm(_t(x), _t(np.ones(4)), _t(np.zeros(4))).data
    assert abs(out.mean()) < 1e-12
    assert abs(out.var() - 1.0) < 1e-6


def test_gln_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        F.global_layer_norm(_t(np.ones((2, 2))), _t(np.ones(2)), _t(np.zeros(2)), eps=0.0)


def test_prelu_and_sigmoid():
    np.testing.assert_allclose(F.prelu(_t([-1.0, 2.0]), _t([0.25])).data, [-0.25, 2.0])
    assert F.sigmoid(_t([0.0])).data[0] == 0.5
    extreme = F.sigmoid(_t([-800.0, 800.0])).data
    assert np.all(np.isfinite(extreme))


def test_softmax_sums_to_one(rng):
    out = F.softmax(_t(rng.standard_normal((3, 4, 5)) * 50), axis=0).data
    np.testing.assert_allclose(out.sum(axis=0), 1.0, atol=1e-12)


# =================================================================
#  GRADIENTS
# =================================================================
def test_conv1d_gradients_match_finite_differences(rng):
    x = _t(rng.standard_normal((4, 17)), grad=True)
    w = _t(rng.standard_normal((6, 2, 3)), grad=True)
    b = _t(rng.standard_normal(6), grad=True)
    weights = rng.standard_normal((6, F.conv_output_length(17, 3, 2, 2, 2)))

    def loss():
        return F.sum(F.mul(F.conv1d(x, w, b, stride=2, dilation=2, padding=2, groups=2), _t(weights)))

    for leaf, grad in zip((x, w, b), _analytic_grads(loss, (x, w, b))):
        numeric = _numeric_grad(lambda: loss().item(), leaf.data)
        assert relative_error(grad, numeric) < 1e-6


def test_conv_transpose_gradients_match_finite_differences(rng):
    x = _t(rng.standard_normal((3, 6)), grad=True)
    w = _t(rng.standard_normal((3, 2, 4)), grad=True)
    weights = rng.standard_normal((2, 5 * 2 + 4))

    def loss():
        return F.sum(F.mul(F.conv_transpose1d(x, w, stride=2), _t(weights)))

    for leaf, grad in zip((x, w), _analytic_grads(loss, (x, w))):
        assert relative_error(grad, _numeric_grad(lambda: loss().item(), leaf.data)) < 1e-6


def test_gln_gradients_match_finite_differences(rng):
    x = _t(rng.standard_normal((3, 8)), grad=True)
    gain = _t(rng.standard_normal(3), grad=True)
    bias = _t(rng.standard_normal(3), grad=True)
    weights = rng.standard_normal((3, 8))

    def loss():
        return F.sum(F.mul(F.global_layer_norm(x, gain, bias), _t(weights)))

    for leaf, grad in zip((x, gain, bias), _analytic_grads(loss, (x, gain, bias))):
        assert relative_error(grad, _numeric_grad(lambda: loss().item(), leaf.data)) < 1e-5


def test_activation_gradients_match_finite_differences(rng):
    # keep inputs away from the kinks at 0
    values = rng.uniform(0.1, 2.0, size=12) * rng.choice([-1.0, 1.0], size=12)
    x = _t(values, grad=True)
    slope = _t([0.3], grad=True)
    weights = rng.standard_normal(12)

    def loss():
        y = F.add(F.relu(x), F.prelu(x, slope))
        y = F.add(y, F.sigmoid(x))
        return F.sum(F.mul(y, _t(weights)))

    for leaf, grad in zip((x, slope), _analytic_grads(loss, (x, slope))):
        assert relative_error(grad, _numeric_grad(lambda: loss().item(), leaf.data)) < 1e-6


# =================================================================
#  TAPE
# =================================================================
def test_backward_of_sum_is_ones():
    x = _t(np.arange(5.0), grad=True)
    with Tape():
        loss = F.sum(x)
    backward(loss)
    np.testing.assert_array_equal(x.grad, np.ones(5))


def test_backward_of_self_dot_is_twice_input():
    x = _t([1.0, -2.0, 3.0], grad=True)
    with Tape():
        loss = F.dot(x, x)
    backward(loss)
    np.testing.assert_array_equal(x.grad, [2.0, -4.0, 6.0])


def test_backward_errors():
    x = _t([1.0, 2.0], grad=True)
    with Tape() as tape:
        vec = F.mul(x, 2.0)
    with pytest.raises(RuntimeError):
        tape.backward(vec)

    with Tape() as tape:
        loss = F.sum(x)
    tape.backward(loss)
    with pytest.raises(RuntimeError):
        tape.backward(loss)

    outside = F.sum(x)
    with pytest.raises(RuntimeError):
        backward(outside)


def test_item_needs_single_element():
    assert _t([[2.5]]).item() == 2.5
    with pytest.raises(ValueError):
        _t([1.0, 1.0]).item()


def test_reset_tape_can_be_reused():
    x = _t([1.0, 2.0], grad=True)
    tape = Tape()
    for _ in range(2):
        x.zero_grad()
        tape.reset()
        with tape:
            loss = F.sum(F.mul(x, x))
        tape.backward(loss)
    np.testing.assert_array_equal(x.grad, [2.0, 4.0])


def test_primitives_are_deterministic(rng):
    x = rng.standard_normal((4, 40))
    w = rng.standard_normal((8, 4, 3))
    first = F.conv1d(_t(x), _t(w), dilation=2, padding=2).data
    second = F.conv1d(_t(x), _t(w), dilation=2, padding=2).data
    assert np.array_equal(first, second)
