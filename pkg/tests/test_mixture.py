import math

import pytest
from hypothesis import given, strategies as st

from oracles import textbook_step
from rgbd_gmm.config import ConfigError, MixtureConfig
from rgbd_gmm.mixture import (
    PixelLabel,
    PixelMixture,
    classify,
    init_mixture,
    match_component,
    rank_components,
    step_pixel,
    update_mixture,
)

CFG = MixtureConfig()


def mix(means, sigmas, weights):
    return PixelMixture(
        means=tuple(tuple(float(v) for v in mu) for mu in means),
        variances=tuple(float(s) ** 2 for s in sigmas),
        weights=tuple(float(w) for w in weights),
    )


def check_invariants(m: PixelMixture, cfg: MixtureConfig):
    assert abs(sum(m.weights) - 1.0) <= 1e-6
    assert all(w >= 0.0 for w in m.weights)
    assert all(v >= cfg.variance_floor for v in m.variances)


# ------------------------------------------------------------------ config

@pytest.mark.parametrize(
    "kwargs",
    [
        {"components": 2},
        {"components": 6},
        {"learning_rate": 0.0},
        {"learning_rate": 1.0},
        {"background_threshold": 1.0},
        {"match_lambda": 0.0},
        {"initial_sigma": -1.0},
        {"initial_weight": 0.0},
        {"variance_floor": 0.0},
    ],
)
def test_invalid_config_rejected(kwargs):
    with pytest.raises(ConfigError):
        MixtureConfig(**kwargs)


# ------------------------------------------------------------------ init

def test_init_scalar():
    m = init_mixture((120,), CFG)
    assert m.means[0] == (120.0,)
    assert m.weights == (1.0, 0.0, 0.0)
    assert m.variances == (225.0, 225.0, 225.0)


def test_init_zero_color():
    m = init_mixture((0, 0, 0), CFG)
    assert m.means[0] == (0.0, 0.0, 0.0)
    assert sum(m.weights) == 1.0


@given(st.integers(3, 5), st.floats(1.0, 200.0))
def test_init_all_variances_equal_sigma_init(components, sigma):
    cfg = MixtureConfig(components=components, initial_sigma=sigma)
    m = init_mixture((5.0, 6.0, 7.0), cfg)
    assert m.components == components
    assert all(v == sigma * sigma for v in m.variances)


# ------------------------------------------------------------------ match

def test_match_inside_threshold():
    # 20 < 2.5 * 10
    m = mix([(100,), (0,), (0,)], [10, 10, 10], [1.0, 0.0, 0.0])
    assert match_component(m, (120,), CFG) == 0


def test_no_match_outside_threshold():
    # 30 > 2.5 * 10 and the empty components sit far away at 0
    m = mix([(100,), (0,), (0,)], [10, 10, 10], [1.0, 0.0, 0.0])
    assert match_component(m, (130,), CFG) is None


def test_match_exact_mean():
    m = init_mixture((42.0,), CFG)
    assert match_component(m, (42.0,), CFG) == 0


def test_match_uses_chebyshev_distance():
    # each channel within 2.5 sigma, Euclidean distance is not
    m = mix([(100, 100, 100), (0, 0, 0), (0, 0, 0)], [10, 10, 10], [1, 0, 0])
    assert match_component(m, (124, 124, 124), CFG) == 0
    assert match_component(m, (124, 126, 100), CFG) is None


def test_match_scans_by_rank_first_wins():
    # both components cover the value; the better-ranked one (index 1) wins
    m = mix([(100,), (104,), (0,)], [10, 10, 10], [0.3, 0.6, 0.1])
    assert rank_components(m) == [1, 0, 2]
    assert match_component(m, (102,), CFG) == 1


def test_rank_ties_keep_index_order():
    m = mix([(0,), (0,), (0,)], [10, 10, 10], [0.25, 0.5, 0.25])
    assert rank_components(m) == [1, 0, 2]


def test_match_dimension_mismatch():
    with pytest.raises(ValueError):
        match_component(init_mixture((1.0,), CFG), (1.0, 2.0), CFG)


# ------------------------------------------------------------------ update

def test_weight_update_hand_arithmetic():
    cfg = MixtureConfig(learning_rate=0.1)
    m = mix([(50,), (90,), (150,)], [10, 10, 10], [0.5, 0.3, 0.2])
    out = update_mixture(m, (50,), 0, cfg)
    assert out.weights == pytest.approx((0.55, 0.27, 0.18), abs=1e-12)


def test_matched_mean_and_variance_update():
    cfg = MixtureConfig(learning_rate=0.1)
    m = mix([(50,), (90,), (150,)], [10, 10, 10], [0.5, 0.3, 0.2])
    out = update_mixture(m, (60,), 0, cfg)
    w0 = out.weights[0]  # 0.55
    rho = 0.1 / w0
    mu = (1 - rho) * 50 + rho * 60
    var = (1 - rho) * 100 + rho * (60 - mu) ** 2
    assert out.means[0][0] == pytest.approx(mu, rel=1e-12)
    assert out.variances[0] == pytest.approx(var, rel=1e-12)
    assert out.means[1:] == m.means[1:] and out.variances[1:] == m.variances[1:]


def test_unmatched_replaces_weakest():
    m = mix([(50,), (90,), (150,)], [10, 10, 20], [0.6, 0.3, 0.1])
    out = update_mixture(m, (200,), None, CFG)
    assert out.means[2] == (200.0,)
    assert out.variances[2] == CFG.initial_sigma ** 2
    total = 0.6 + 0.3 + CFG.initial_weight
    assert out.weights == pytest.approx((0.6 / total, 0.3 / total, CFG.initial_weight / total))


def test_variance_floor_applies():
    cfg = MixtureConfig(variance_floor=4.0)
    m = mix([(10,), (0,), (0,)], [2.0, 15, 15], [1.0, 0.0, 0.0])
    for _ in range(50):
        m = update_mixture(m, (10,), 0, cfg)
    assert m.variances[0] == 4.0


# ------------------------------------------------------------------ classify

def test_classify_third_component_outside_prefix():
    # cumulative 0.7, 0.9 > 0.8: prefix is the first two components
    m = mix([(0,), (50,), (100,)], [10, 10, 10], [0.7, 0.2, 0.1])
    assert classify(m, 2, CFG) is PixelLabel.FOREGROUND
    assert classify(m, 1, CFG) is PixelLabel.BACKGROUND


def test_classify_no_match_is_foreground():
    m = init_mixture((10.0,), CFG)
    assert classify(m, None, CFG) is PixelLabel.FOREGROUND


def test_classify_top_component_background():
    m = mix([(0,), (50,), (100,)], [10, 10, 10], [0.9, 0.05, 0.05])
    assert classify(m, 0, CFG) is PixelLabel.BACKGROUND


# ------------------------------------------------------------------ step

def test_step_dominant_value():
    m = mix([(100,), (0,), (0,)], [10, 15, 15], [0.9, 0.05, 0.05])
    label, out = step_pixel(m, (100,), CFG)
    assert label is PixelLabel.BACKGROUND
    assert out.weights[0] > 0.9


def test_step_far_value():
    m = mix([(100,), (50,), (0,)], [10, 15, 15], [0.9, 0.07, 0.03])
    label, out = step_pixel(m, (250,), CFG)
    assert label is PixelLabel.FOREGROUND
    assert out.means[2] == (250.0,)


def test_constant_input_weight_monotone_to_one():
    m = init_mixture((80.0,), CFG)
    m = update_mixture(m, (200.0,), None, CFG)  # knock the dominant weight down
    prev = m.weights[0]
    for _ in range(300):
        _, m = step_pixel(m, (80.0,), CFG)
        assert m.weights[0] >= prev
        prev = m.weights[0]
    assert prev > 1.0 - 1e-6


def test_burn_in_background_by_step_100():
    # a value far from a settled history: after 100 steps it must be background
    cfg = MixtureConfig(learning_rate=0.05)
    m = init_mixture((30.0, 30.0, 30.0), cfg)
    for _ in range(50):
        _, m = step_pixel(m, (30.0, 30.0, 30.0), cfg)
    labels = []
    for _ in range(100):
        label, m = step_pixel(m, (200.0, 180.0, 160.0), cfg)
        labels.append(label)
    assert labels[0] is PixelLabel.FOREGROUND
    assert labels[99] is PixelLabel.BACKGROUND


# ------------------------------------------------------------------ properties

values = st.floats(0.0, 255.0, allow_nan=False)


@st.composite
def histories(draw):
    m = draw(st.integers(3, 5))
    d = draw(st.sampled_from([1, 3, 4]))
    n = draw(st.integers(1, 60))
    seq = draw(st.lists(st.tuples(*[values] * d), min_size=n, max_size=n))
    alpha = draw(st.floats(0.001, 0.5))
    return MixtureConfig(components=m, learning_rate=alpha), seq


@given(histories())
def test_invariants_hold_along_any_history(case):
    cfg, seq = case
    m = init_mixture(seq[0], cfg)
    check_invariants(m, cfg)
    for v in seq[1:]:
        _, m = step_pixel(m, v, cfg)
        check_invariants(m, cfg)


@given(histories())
def test_step_is_pure(case):
    cfg, seq = case
    m = init_mixture(seq[0], cfg)
    for v in seq[1:]:
        a = step_pixel(m, v, cfg)
        b = step_pixel(m, v, cfg)
        assert a == b
        m = a[1]


@given(histories())
def test_matches_textbook_oracle(case):
    cfg, seq = case
    m = init_mixture(seq[0], cfg)
    kw = dict(
        alpha=cfg.learning_rate, lam=cfg.match_lambda, thresh=cfg.background_threshold,
        var_init=cfg.initial_sigma ** 2, w_new=cfg.initial_weight, floor=cfg.variance_floor,
    )
    for v in seq[1:]:
        label, nxt = step_pixel(m, v, cfg)
        o_label, o_means, o_vars, o_weights = textbook_step(
            m.means, m.variances, m.weights, v, **kw
        )
        assert int(label) == o_label
        assert nxt.weights == pytest.approx(tuple(o_weights), rel=1e-12, abs=1e-15)
        assert nxt.variances == pytest.approx(tuple(o_vars), rel=1e-12)
        for mu, omu in zip(nxt.means, o_means):
            assert mu == pytest.approx(tuple(omu), rel=1e-12, abs=1e-12)
        m = nxt


@given(histories(), st.integers(0, 4))
def test_exact_mean_with_wide_sigma_always_matches(case, pick):
    cfg, seq = case
    m = init_mixture(seq[0], cfg)
    for v in seq[1:]:
        _, m = step_pixel(m, v, cfg)
    i = pick % m.components
    if math.sqrt(m.variances[i]) >= cfg.initial_sigma:
        assert match_component(m, m.means[i], cfg) is not None


@given(histories())
def test_classify_none_is_foreground(case):
    cfg, seq = case
    m = init_mixture(seq[0], cfg)
    for v in seq[1:]:
        _, m = step_pixel(m, v, cfg)
    assert classify(m, None, cfg) is PixelLabel.FOREGROUND
