import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rgbd_gmm.config import AugmentedConfig, MixtureConfig
from rgbd_gmm.engine import WorkerPool
from rgbd_gmm.mixture import init_mixture, step_pixel
from rgbd_gmm.segmenter import (
    Mode,
    ModelBank,
    augmented_observation,
    segment_augmented,
    segment_frame,
)

CFG = MixtureConfig()
DEPTH_CFG = MixtureConfig(initial_sigma=100.0)


def scalar_replay(history, cfg):
    """Per-pixel oracle: labels and final mixture from the scalar reference path."""
    m = None
    labels = []
    for v in history:
        if m is None:
            m = init_mixture(v, cfg)
            labels.append(0)
        else:
            label, m = step_pixel(m, v, cfg)
            labels.append(int(label))
    return labels, m


def test_first_frame_all_background():
    rng = np.random.default_rng(0)
    bank = ModelBank(7, 5, Mode.COLOR3, CFG)
    frame = rng.integers(0, 256, (3, 5, 7), dtype=np.uint8)
    assert not segment_frame(bank, frame).any()
    assert bank.initialized.all()


def test_changed_block_after_static_history():
    rng = np.random.default_rng(1)
    bg = rng.integers(40, 200, (3, 32, 40), dtype=np.uint8)
    bank = ModelBank(40, 32, Mode.COLOR3, CFG)
    for _ in range(100):
        assert not segment_frame(bank, bg).any()
    frame = bg.copy()
    frame[:, 10:20, 5:15] = 255 - frame[:, 10:20, 5:15]
    mask = segment_frame(bank, frame)
    expected = np.zeros((32, 40), np.uint8)
    expected[10:20, 5:15] = 1
    # brute-force oracle for every pixel
    oracle = np.zeros_like(expected)
    hist_bg = [tuple(float(c) for c in bg[:, 0, 0])]
    for y in range(32):
        for x in range(40):
            h = [tuple(float(c) for c in bg[:, y, x])] * 100 + [tuple(float(c) for c in frame[:, y, x])]
            oracle[y, x] = scalar_replay(h, CFG)[0][-1]
    assert hist_bg
    assert np.array_equal(oracle, expected)
    assert np.array_equal(mask, expected)


def test_zero_depth_region_untouched():
    rng = np.random.default_rng(2)
    bank = ModelBank(16, 12, Mode.DEPTH1, DEPTH_CFG)
    base = rng.integers(900, 3000, (12, 16)).astype(np.uint16)
    for _ in range(5):
        segment_frame(bank, base)
    before = (bank.means.copy(), bank.variances.copy(), bank.weights.copy())
    frame = rng.integers(100, 4000, (12, 16)).astype(np.uint16)
    frame[3:7, 4:9] = 0
    mask = segment_frame(bank, frame)
    assert not mask[3:7, 4:9].any()
    assert np.array_equal(bank.means[:, 3:7, 4:9], before[0][:, 3:7, 4:9])
    assert np.array_equal(bank.variances[:, 3:7, 4:9], before[1][:, 3:7, 4:9])
    assert np.array_equal(bank.weights[:, 3:7, 4:9], before[2][:, 3:7, 4:9])


def test_depth_pixel_initializes_on_first_valid_reading():
    bank = ModelBank(2, 1, Mode.DEPTH1, DEPTH_CFG)
    segment_frame(bank, np.array([[0, 1500]], np.uint16))
    assert bank.initialized.tolist() == [[0, 1]]
    assert bank.pixel_mixture(0, 0) is None
    mask = segment_frame(bank, np.array([[2000, 1500]], np.uint16))
    assert mask.tolist() == [[0, 0]]
    assert bank.pixel_mixture(0, 0).means[0] == (2000.0,)


@pytest.mark.parametrize("mode", [Mode.COLOR3, Mode.DEPTH1, Mode.AUGMENTED4])
def test_soa_banks_equal_scalar_reference(mode):
    """Any pixel's mixture from the planes equals its isolated scalar replay, bitwise."""
    rng = np.random.default_rng(10 + mode.dim)
    h, w, n = 6, 9, 40
    cfg = DEPTH_CFG if mode is Mode.DEPTH1 else CFG
    bank = ModelBank(w, h, mode, cfg)
    # a mix of steady pixels, jumps and (for depth) dropouts
    color = np.repeat(rng.integers(0, 256, (1, 3, h, w)), n, axis=0).astype(np.int32)
    color += rng.integers(-6, 7, color.shape)
    color[n // 2:, :, :3, :4] += 90
    color = np.clip(color, 0, 255).astype(np.uint8)
    depth = np.repeat(rng.integers(500, 4500, (1, h, w)), n, axis=0)
    depth = depth + rng.integers(-20, 21, depth.shape)
    depth[rng.random(depth.shape) < 0.1] = 0
    depth = depth.astype(np.uint16)

    masks = []
    for t in range(n):
        if mode is Mode.COLOR3:
            masks.append(segment_frame(bank, color[t]))
        elif mode is Mode.DEPTH1:
            masks.append(segment_frame(bank, depth[t]))
        else:
            masks.append(segment_augmented(bank, color[t], depth[t]))

    for y in range(h):
        for x in range(w):
            if mode is Mode.COLOR3:
                hist = [tuple(float(c) for c in color[t, :, y, x]) for t in range(n)]
                valid = [True] * n
            elif mode is Mode.DEPTH1:
                hist = [(float(depth[t, y, x]),) for t in range(n)]
                valid = [depth[t, y, x] != 0 for t in range(n)]
            else:
                hist = [augmented_observation(color[t, :, y, x], float(depth[t, y, x])) for t in range(n)]
                valid = [True] * n
            kept = [v for v, ok in zip(hist, valid) if ok]
            labels, ref = scalar_replay(kept, cfg)
            got = [int(masks[t][y, x]) for t in range(n) if valid[t]]
            assert got == labels
            assert all(masks[t][y, x] == 0 for t in range(n) if not valid[t])
            assert bank.pixel_mixture(y, x) == ref


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_worker_count_does_not_change_results(workers, seed):
    rng = np.random.default_rng(seed)
    frames = rng.integers(0, 256, (6, 3, 13, 11), dtype=np.uint8)
    a = ModelBank(11, 13, Mode.COLOR3, CFG)
    b = ModelBank(11, 13, Mode.COLOR3, CFG)
    with WorkerPool(workers) as pool:
        for f in frames:
            assert np.array_equal(segment_frame(a, f), segment_frame(b, f, pool=pool))
    assert a.state_equal(b)


def test_augmented_rescale_endpoint():
    assert augmented_observation((0, 0, 0), 4000.0)[3] == 255.0
    assert augmented_observation((0, 0, 0), 0.0)[3] == 0.0
    assert augmented_observation((0, 0, 0), 9000.0)[3] == 255.0
    assert augmented_observation((0, 0, 0), 2000.0)[3] == 127.5


def test_augmented_constant_frames_background():
    bank = ModelBank.for_augmented(8, 6, AugmentedConfig())
    color = np.full((3, 6, 8), 90, np.uint8)
    depth = np.full((6, 8), 2500, np.uint16)
    for _ in range(20):
        assert not segment_augmented(bank, color, depth).any()


def test_augmented_color_gain_gives_spurious_foreground():
    """Depth is unchanged but the color-only gain still floods the 4-channel mask."""
    rng = np.random.default_rng(5)
    color = rng.integers(60, 150, (3, 24, 32)).astype(np.uint8)
    depth = rng.integers(1500, 2500, (24, 32)).astype(np.uint16)
    bank = ModelBank.for_augmented(32, 24, AugmentedConfig())
    for _ in range(60):
        segment_augmented(bank, color, depth)
    bright = np.clip(color * 1.5, 0, 255).astype(np.uint8)
    mask = segment_augmented(bank, bright, depth)
    assert mask.mean() > 0.9


def test_mode_and_shape_errors():
    bank = ModelBank(4, 3, Mode.COLOR3, CFG)
    with pytest.raises(ValueError):
        segment_frame(bank, np.zeros((3, 4, 4), np.uint8))
    with pytest.raises(ValueError):
        segment_frame(bank, np.zeros((3, 4), np.uint16))
    dbank = ModelBank(4, 3, Mode.DEPTH1, DEPTH_CFG)
    with pytest.raises(ValueError):
        segment_frame(dbank, np.zeros((3, 3, 4), np.uint8))
    with pytest.raises(ValueError):
        segment_augmented(bank, np.zeros((3, 3, 4), np.uint8), np.zeros((3, 4), np.uint16))
    abank = ModelBank.for_augmented(4, 3, AugmentedConfig())
    with pytest.raises(ValueError):
        segment_frame(abank, np.zeros((3, 3, 4), np.uint8))


def test_plane_set_exposes_views():
    bank = ModelBank(4, 3, Mode.COLOR3, CFG)
    ps = bank.plane_set()
    assert "mean[2][1]" in ps.roles() and "weight[0]" in ps.roles()
    ps["weight[0]"][0, 0] = 0.5
    assert bank.weights[0, 0, 0] == 0.5
