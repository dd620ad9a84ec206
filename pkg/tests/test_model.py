import numpy as np
import pytest

from metrics import pit_loss
from models import SeparationModel, SharingConfig, build_store, enumerate_ablation_grid, fold_gradients, preset, unshare
from models.config import PRESET_NAMES, receptive_field
from models.sharing import UNSHARED
from numeric import Tape, Tensor
from numeric import functional as F
from utils import find_violations, relative_error


def _projection_loss(model, mixture, weights):
    return F.sum(F.mul(model(mixture).sources, Tensor(weights, dtype=model.dtype)))


# =================================================================
#  SHAPES / GEOMETRY
# =================================================================
@pytest.mark.parametrize("name", PRESET_NAMES)
def test_every_preset_separates_into_c_sources(name):
    cfg = preset(name)
    model = SeparationModel(cfg)
    length = 3 * cfg.L + 1
    out = model(np.random.default_rng(0).standard_normal(length))
    assert out.sources.shape == (cfg.C, model.analyzed_length(length))
    assert out.masks.shape == (cfg.C, cfg.N, model.num_frames(length))


def test_frame_count():
    model = SeparationModel(preset("tiny"), dtype=np.float64)
    assert model.num_frames(10) == 4
    assert model.encode(np.ones(10)).shape == (16, 4)
    assert model.analyzed_length(11) == 10


def test_decoder_output_length(tiny_config):
    for L, T in ((4, 10), (8, 40), (2, 7)):
        model = SeparationModel(tiny_config.replace(L=L, stride=0), dtype=np.float64)
        frames = model.num_frames(T)
        assert model(np.ones(T)).sources.shape[1] == (frames - 1) * model.config.stride + L


def test_zero_input_encodes_to_zero(tiny_config):
    model = SeparationModel(tiny_config, dtype=np.float64)
    assert not np.any(model.encode(np.zeros(30)).data)


def test_short_mixture_is_rejected(tiny_config):
    model = SeparationModel(tiny_config)
    with pytest.raises(ValueError):
        model(np.zeros(3))
    with pytest.raises(ValueError):
        model(np.zeros((2, 10)))


def test_invalid_config_is_rejected(tiny_config):
    with pytest.raises(ValueError):
        SeparationModel(tiny_config.replace(P=4))
    with pytest.raises(ValueError):
        SeparationModel(tiny_config.replace(mask_activation="tanh"))


def test_missing_parameter_raises_key_error(tiny_config):
    store = build_store(tiny_config, dtype=np.float64)
    victim = next(k for k in store.tensors if k.is_block)
    del store.tensors[victim]
    with pytest.raises(KeyError, match=str(victim).replace("*", r"\*")):
        SeparationModel(tiny_config, store)


# =================================================================
#  MASKS
# =================================================================
def test_sigmoid_masks_lie_in_unit_interval(tiny_config, rng):
    masks = SeparationModel(tiny_config, dtype=np.float64)(rng.standard_normal(200)).masks.data
    assert masks.min() >= 0.0 and masks.max() <= 1.0


def test_softmax_masks_sum_to_one(tiny_config, rng):
    model = SeparationModel(tiny_config.replace(mask_activation="softmax"), dtype=np.float64)
    masks = model(rng.standard_normal(200)).masks.data
    np.testing.assert_allclose(masks.sum(axis=0), 1.0, atol=1e-6)


def test_swapping_masks_swaps_sources(tiny_config, rng):
    model = SeparationModel(tiny_config, dtype=np.float64)
    features = model.encode(rng.standard_normal(120))
    masks = model.separate(features)
    swapped = Tensor(masks.data[::-1].copy(), dtype=np.float64)
    straight = model.decode(F.mul(masks, features)).data
    crossed = model.decode(F.mul(swapped, features)).data
    np.testing.assert_array_equal(crossed, straight[::-1])


def test_encoder_is_stride_covariant(tiny_config, rng):
    model = SeparationModel(tiny_config, dtype=np.float64)
    x = rng.standard_normal(100)
    full = model.encode(x).data
    shifted = model.encode(x[tiny_config.stride:]).data
    np.testing.assert_allclose(shifted, full[:, 1:], rtol=1e-12, atol=1e-12)


def test_receptive_field_of_separator(tiny_config, rng):
    cfg = tiny_config.replace(normalization="none")
    model = SeparationModel(cfg, dtype=np.float64)
    frames, t0 = 101, 50
    features = np.abs(rng.standard_normal((cfg.N, frames)))
    base = model.separate(Tensor(features, dtype=np.float64)).data
    features[:, t0] += 1.0
    moved = model.separate(Tensor(features, dtype=np.float64)).data
    changed = np.nonzero(np.max(np.abs(moved - base), axis=(0, 1)) > 0)[0]
    half = (receptive_field(cfg) - 1) // 2
    assert changed.min() == t0 - half
    assert changed.max() == t0 + half


def test_zeroed_blocks_leave_only_bottleneck_and_mask_head(tiny_config, rng):
    cfg = tiny_config.replace(Sc=0)
    model = SeparationModel(cfg, dtype=np.float64)
    for key, tensor in model.store.items():
        if key.is_block:
            tensor.data[...] = 0.0
    features = Tensor(np.abs(rng.standard_normal((cfg.N, 30))), dtype=np.float64)

    p = dict((str(k), t) for k, t in model.store.items())
    y = F.global_layer_norm(features, p["bottleneck.norm_gain"], p["bottleneck.norm_bias"])
    y = F.conv1d(y, p["bottleneck.weight"], p["bottleneck.bias"])
    y = F.prelu(y, p["mask_head.prelu_slope"])
    y = F.conv1d(y, p["mask_head.weight"], p["mask_head.bias"])
    expected = F.sigmoid(F.reshape(y, (cfg.C, cfg.N, 30))).data

    np.testing.assert_array_equal(model.separate(features).data, expected)


# =================================================================
#  SHARED VS. COPIED WEIGHTS
# =================================================================
@pytest.mark.parametrize("code", [c.code for c in enumerate_ablation_grid()])
def test_shared_model_equals_copied_weight_model(tiny_config, code, rng):
    cfg = tiny_config.with_sharing(SharingConfig.parse(code))
    shared = SeparationModel(cfg, seed=3, dtype=np.float64)
    copied = SeparationModel(cfg.with_sharing(UNSHARED), unshare(shared.store, cfg))
    x = rng.standard_normal(160)

    out_shared = shared(x).sources.data
    out_copied = copied(x).sources.data
    assert np.max(np.abs(out_shared - out_copied)) <= 1e-12

    weights = rng.standard_normal(out_shared.shape)
    for model in (shared, copied):
        with Tape() as tape:
            loss = _projection_loss(model, x, weights)
        tape.backward(loss)

    folded = fold_gradients(copied.store.gradients(), cfg.sharing)
    assert find_violations(folded, shared.store.gradients(), atol=1e-12, rtol=1e-10, verbose=False) == []


def test_initialization_does_not_depend_on_sharing(tiny_config):
    unshared = build_store(tiny_config, seed=5)
    shared = build_store(tiny_config.with_sharing(SharingConfig.parse("aa")), seed=5)
    for key, tensor in shared.items():
        if not key.is_block:
            np.testing.assert_array_equal(tensor.data, unshared.get(key).data)


def test_forward_is_deterministic(tiny_config, rng):
    x = rng.standard_normal(90)
    a = SeparationModel(tiny_config, seed=11)(x).sources.data
    b = SeparationModel(tiny_config, seed=11)(x).sources.data
    assert np.array_equal(a, b)


# =================================================================
#  FULL-MODEL GRADIENT CHECK
# =================================================================
def _pit_objective(model, mixture, references):
    return pit_loss(model(mixture).sources, references)[0]


# "sd": separable tied across stacks, pointwise across dilations; "aa": one block for the whole separator
@pytest.mark.parametrize("code", ["sd", "aa"])
def test_full_model_gradient_matches_finite_differences(grad_config, code):
    rng = np.random.default_rng(21)
    cfg = grad_config.with_sharing(SharingConfig.parse(code))
    model = SeparationModel(cfg, seed=2, dtype=np.float64)
    x = rng.standard_normal(32)
    references = rng.standard_normal((cfg.C, model.analyzed_length(32)))

    with Tape() as tape:
        loss = _pit_objective(model, x, references)
    tape.backward(loss)
    analytic = {k: t.grad.copy() for k, t in model.store.items()}

    h = 1e-6
    worst = 0.0
    for key, tensor in model.store.items():
        numeric = np.zeros_like(tensor.data)
        for idx in np.ndindex(tensor.shape):
            old = tensor.data[idx]
            tensor.data[idx] = old + h
            up = _pit_objective(model, x, references).item()
            tensor.data[idx] = old - h
            down = _pit_objective(model, x, references).item()
            tensor.data[idx] = old
            numeric[idx] = (up - down) / (2 * h)
        if np.max(np.abs(numeric - analytic[key])) > 1e-8:
            worst = max(worst, relative_error(analytic[key], numeric))
    assert worst < 1e-4
    assert model.store.num_parameters() < 1500
