import numpy as np
import pytest

from models import (
    ParamKey,
    SharingConfig,
    SharingScheme,
    audit,
    build_store,
    canonicalize,
    enumerate_ablation_grid,
    preset,
    unique_site_count,
)
from models.parameter_store import count_parameters
from models.sharing import block_key, scheme_flags

CODES = [cfg.code for cfg in enumerate_ablation_grid()]


def _formula_size(cfg, sharing):
    """Closed-form parameter count of a gLN network with skip connections."""
    N, L, B, H, Sc, P, C = cfg.N, cfg.L, cfg.B, cfg.H, cfg.Sc, cfg.P, cfg.C
    pointwise_site = H * B + H + 1 + 2 * H + Sc * H + Sc
    separable_site = H * P + H + 1 + 2 * H + B * H + B
    outer = N * L + 2 * N + B * N + B + 1 + C * N * Sc + C * N + N * L
    return (
        outer
        + pointwise_site * unique_site_count(cfg.X, cfg.R, sharing.pointwise)
        + separable_site * unique_site_count(cfg.X, cfg.R, sharing.separable)
    )


# =================================================================
#  CANONICAL KEYS
# =================================================================
def test_canonicalize_examples():
    key = block_key("separable", 2, 5, "depthwise_weight")
    assert str(canonicalize(key, SharingConfig.parse("sn"))) == "block.separable.r*.x5.depthwise_weight"
    assert str(canonicalize(key, SharingConfig.parse("dn"))) == "block.separable.r2.x*.depthwise_weight"
    assert str(canonicalize(key, SharingConfig.parse("an"))) == "block.separable.r*.x*.depthwise_weight"
    # the other component's scheme does not apply
    assert canonicalize(key, SharingConfig.parse("na")) == key


def test_non_block_keys_are_never_shared():
    key = ParamKey("encoder", "weight")
    assert canonicalize(key, SharingConfig.parse("aa")) == key


@pytest.mark.parametrize("code", CODES)
def test_canonicalize_is_idempotent(code):
    sharing = SharingConfig.parse(code)
    for component in ("separable", "pointwise"):
        key = canonicalize(block_key(component, 1, 3, "prelu_slope"), sharing)
        assert canonicalize(key, sharing) == key


def test_key_text_round_trip():
    for text in ("block.pointwise.r*.x3.input_weight", "block.separable.r1.x*.norm_gain", "decoder.weight"):
        assert str(ParamKey.parse(text)) == text
    with pytest.raises(ValueError):
        ParamKey.parse("block.pointwise.3.input_weight")


def test_unique_site_count():
    assert unique_site_count(8, 3, SharingScheme.STACK) == 8
    assert unique_site_count(8, 3, SharingScheme.NONE) == 24
    assert unique_site_count(8, 3, SharingScheme.DILATION) == 3
    assert unique_site_count(8, 3, SharingScheme.ALL) == 1
    with pytest.raises(ValueError):
        unique_site_count(0, 3, SharingScheme.NONE)


def test_scheme_parse_rejects_unknown_letters():
    with pytest.raises(ValueError):
        SharingConfig.parse("sx")
    with pytest.raises(ValueError):
        SharingConfig.parse("s")


def test_ablation_grid_order():
    grid = enumerate_ablation_grid()
    assert len(grid) == 16
    assert len(set(CODES)) == 16
    assert grid[0].is_unshared
    ss = SharingConfig.parse("ss")
    assert ss in grid
    assert (ss.separable, ss.pointwise) == (SharingScheme.STACK, SharingScheme.STACK)
    assert scheme_flags(SharingConfig.parse("da")) == (False, True, True, True)


# =================================================================
#  PARAMETER AUDIT
# =================================================================
def test_convtasnet_base_size():
    report = audit(preset("convtasnet_base"))
    assert 4_950_000 <= report.total <= 5_250_000
    assert report.compression_ratio == 100.0


@pytest.mark.parametrize("code,expected", [("ss", 36.0), ("sn", 77.0), ("ns", 58.0)])
def test_convtasnet_compression(code, expected):
    base = preset("convtasnet_base")
    report = audit(base.with_sharing(SharingConfig.parse(code)), baseline=base)
    assert abs(report.compression_ratio - expected) <= 3.0


def test_simplified_stack_model_matches_stack_sharing_size():
    base = preset("convtasnet_base")
    one_stack = audit(preset("simplified1"), baseline=base)
    shared = audit(base.with_sharing(SharingConfig.parse("ss")), baseline=base)
    assert one_stack.total == shared.total
    assert abs(one_stack.compression_ratio - 36.0) <= 3.0


@pytest.mark.parametrize("name", ["convtasnet_base", "tasnet_base", "tiny"])
def test_audit_report_shows_stack_identity(name):
    report = audit(preset(name))
    assert report.stack_identity_holds
    assert report.stack_shared_total == audit(preset(name).with_sharing(SharingConfig.parse("ss"))).total
    assert report.one_stack_total == count_parameters(preset(name).replace(R=1))[0]
    assert f"{report.stack_shared_total:,d} == {report.one_stack_total:,d}" in report.to_text()


def test_tasnet_stack_sharing_is_independent_of_stack_count():
    base = preset("tasnet_base")
    ss = SharingConfig.parse("ss")
    report = audit(base.with_sharing(ss), baseline=base)
    assert abs(report.compression_ratio - 26.7) <= 3.0
    for stacks in (1, 2, 6):
        assert count_parameters(base.replace(R=stacks, sharing=ss))[0] == report.total


@pytest.mark.parametrize("code", CODES)
def test_audit_matches_closed_form(tiny_config, code):
    sharing = SharingConfig.parse(code)
    cfg = tiny_config.with_sharing(sharing)
    assert audit(cfg).total == _formula_size(cfg, sharing)
    assert build_store(cfg).num_parameters() == audit(cfg).total


def test_unshared_ratio_is_100(tiny_config):
    assert audit(tiny_config).compression_ratio == 100.0


@pytest.mark.parametrize("fixed", ["n", "s", "d", "a"])
def test_sharing_more_never_grows_the_model(tiny_config, fixed):
    for chain in (("n", "s", "a"), ("n", "d", "a")):
        sizes_sep = [audit(tiny_config.with_sharing(SharingConfig.parse(c + fixed))).total for c in chain]
        sizes_pw = [audit(tiny_config.with_sharing(SharingConfig.parse(fixed + c))).total for c in chain]
        assert sizes_sep == sorted(sizes_sep, reverse=True)
        assert sizes_pw == sorted(sizes_pw, reverse=True)


def test_stack_sharing_size_ignores_stack_count(tiny_config):
    ss = SharingConfig.parse("ss")
    sizes = {audit(tiny_config.replace(R=r, sharing=ss)).total for r in range(1, 7)}
    assert len(sizes) == 1


def test_breakdown_sums_to_total(tiny_config):
    report = audit(tiny_config.with_sharing(SharingConfig.parse("ds")))
    assert sum(count for _, count in report.rows) == report.total
    assert "TOTAL" in report.to_text()


# =================================================================
#  TYING
# =================================================================
def test_tied_sites_read_the_same_tensor(tiny_config):
    store = build_store(tiny_config.with_sharing(SharingConfig.parse("sa")))
    first = block_key("separable", 0, 1, "depthwise_weight")
    other_stack = block_key("separable", 1, 1, "depthwise_weight")
    other_block = block_key("separable", 1, 2, "depthwise_weight")
    values = np.full(store.get(first).shape, 0.5)
    store.set(first, values)
    np.testing.assert_array_equal(store.get(other_stack).data, values)
    assert not np.array_equal(store.get(other_block).data, values)

    pw = block_key("pointwise", 0, 0, "input_weight")
    store.set(pw, np.zeros(store.get(pw).shape))
    assert not np.any(store.get(block_key("pointwise", 1, 2, "input_weight")).data)
